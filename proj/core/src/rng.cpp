#include "gml/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gml/eigensolver.hpp"

namespace gml {

std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("uniform_index: bound must be positive");
    }
    // Reject the incomplete top block so every residue is equally likely.
    const std::uint64_t limit = Rng::max() - (Rng::max() % bound + 1) % bound;
    std::uint64_t draw = rng();
    while (draw > limit) {
        draw = rng();
    }
    return draw % bound;
}

double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_unit(rng); }

double standard_normal(Rng& rng) {
    double u1 = uniform_unit(rng);
    while (u1 <= 0.0) {
        u1 = uniform_unit(rng);
    }
    const double u2 = uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx[i] = i;
    }
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

SymmetricMatrix random_graph_metric(Rng& rng, std::size_t dim, double edge_prob) {
    SymmetricMatrix m(dim);
    auto add_edge = [&](std::size_t i, std::size_t j, double w) {
        m.at(i, j) -= w;
        m.at(i, i) += w;
        m.at(j, j) += w;
    };
    const auto order = shuffled_indices(dim, rng);
    for (std::size_t k = 1; k < dim; ++k) {
        const auto parent = order[uniform_index(rng, k)];
        add_edge(order[k], parent, uniform_real(rng, 0.05, 1.0));
    }
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i + 1; j < dim; ++j) {
            if (m(i, j) == 0.0 && uniform_unit(rng) < edge_prob) {
                add_edge(i, j, uniform_real(rng, 0.05, 1.0));
            }
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        m.at(i, i) += uniform_real(rng, -0.5, 0.5);  // self-loops, either sign
    }
    const double target = uniform_real(rng, 0.01, 1.0);
    const double shift = target - smallest_eigenpair_dense(m).value;
    for (std::size_t i = 0; i < dim; ++i) {
        m.at(i, i) += shift;
    }
    return m;
}

SymmetricMatrix random_spd(Rng& rng, std::size_t dim) {
    SymmetricMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
            m.set(i, j, standard_normal(rng));
        }
    }
    const double target = uniform_real(rng, 0.01, 2.0);
    const double shift = target - smallest_eigenpair_dense(m).value;
    for (std::size_t i = 0; i < dim; ++i) {
        m.at(i, i) += shift;
    }
    return m;
}

BinarySamples random_binary_samples(Rng& rng, std::size_t n, std::size_t dim, double separation) {
    if (n < 2) {
        throw std::invalid_argument("random_binary_samples: need at least two samples");
    }
    BinarySamples out;
    out.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    const std::size_t informative = (dim + 1) / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = (i % 2 == 0) ? 1.0 : -1.0;
        out.labels.push_back(z);
        for (std::size_t k = 0; k < dim; ++k) {
            const double shift = (z > 0 && k < informative) ? separation : 0.0;
            out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = standard_normal(rng) + shift;
        }
    }
    return out;
}

}  // namespace gml
