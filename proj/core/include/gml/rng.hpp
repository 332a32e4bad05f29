#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gml/symmetric_matrix.hpp"

namespace gml {

/// All randomness in the harness comes from std::mt19937_64, whose output
/// sequence is fixed by the C++ standard. The distributions below are written
/// out by hand (the standard library's are implementation-defined), so splits
/// and random instances are identical on every platform.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection sampling. bound must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform_unit(Rng& rng);

/// Uniform double in [lo, hi).
double uniform_real(Rng& rng, double lo, double hi);

/// Standard normal via Box-Muller.
double standard_normal(Rng& rng);

/// Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

/// Random graph metric of dimension `dim`: a random spanning tree plus extra
/// edges with probability `edge_prob`, edge weights in [0.05, 1), a generalized
/// Laplacian diagonal with random (possibly negative) self-loops, shifted so
/// that lambda_min lands in [0.01, 1). Rows may violate the plain Gershgorin
/// condition, as in the worked 3x3 example.
SymmetricMatrix random_graph_metric(Rng& rng, std::size_t dim, double edge_prob = 0.4);

/// Random symmetric positive definite matrix (not sign constrained).
SymmetricMatrix random_spd(Rng& rng, std::size_t dim);

struct BinarySamples {
    Eigen::MatrixXd features;  // N x K
    std::vector<double> labels;  // +1 / -1, both present
};

/// Two Gaussian classes: standard normal features, with the +1 class shifted
/// by `separation` along the first ceil(K/2) features.
BinarySamples random_binary_samples(Rng& rng, std::size_t n, std::size_t dim, double separation = 1.5);

}  // namespace gml
