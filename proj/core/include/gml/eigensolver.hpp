#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gml/symmetric_matrix.hpp"

namespace gml {

/// Smallest eigenpair of a symmetric matrix.
struct EigenPair {
    double value = 0.0;
    std::vector<double> vector;  // unit 2-norm
    double residual = 0.0;       // ||M v - value v||_2, recomputed from (value, vector)
    int iterations = 0;          // iterative solvers only; 0 for the dense route
};

/// ||M v - lambda v||_2
double eigen_residual(const SymmetricMatrix& m, std::span<const double> v, double lambda);

/// Flips the sign of `v` so that its first entry with |v_i| > 0 is positive.
void normalize_sign(std::vector<double>& v);

inline constexpr std::size_t kDenseEigenMaxDim = 500;

/// Full symmetric eigendecomposition; returns the smallest pair.
/// Throws std::invalid_argument for dim > kDenseEigenMaxDim.
EigenPair smallest_eigenpair_dense(const SymmetricMatrix& m);

/// Entries of a unit first eigenvector below this are only resolved to
/// absolute (not relative) precision by the solvers above.
inline constexpr double kPerronRefineThreshold = 1e-6;

/// For a positive definite M with non-positive off-diagonals, M^{-1} is
/// entrywise non-negative and a Cholesky solve with M involves no
/// cancellation, so inverse iteration started from |pair.vector| recovers
/// tiny eigenvector entries to full relative precision. Returns nothing when
/// M has a positive off-diagonal or is not positive definite.
std::optional<EigenPair> refine_perron_pair(const SymmetricMatrix& m, const EigenPair& pair, int max_iters = 50);

/// refine_perron_pair when the smallest entry of pair.vector is below
/// kPerronRefineThreshold and the refinement applies; pair otherwise.
EigenPair refined_if_needed(const SymmetricMatrix& m, EigenPair pair);

struct LobpcgOptions {
    double tol = 1e-9;
    int max_iters = 200;
    /// Gram-matrix condition number above which the basis gets a second
    /// Gram-Schmidt pass.
    double reorth_condition = 1e8;
};

/// Raised when LOBPCG exhausts its iteration budget. Carries the best pair seen.
class LobpcgNotConverged : public std::runtime_error {
public:
    explicit LobpcgNotConverged(EigenPair best);
    const EigenPair& best() const noexcept { return best_; }

private:
    EigenPair best_;
};

/// Locally optimal (block size 1, unpreconditioned) conjugate gradient for the
/// smallest eigenpair. The cold start is the normalized all-ones vector. On
/// return the residual is <= options.tol; `iterations` counts Rayleigh-Ritz steps.
EigenPair smallest_eigenpair_lobpcg(const SymmetricMatrix& m,
                                    std::optional<std::span<const double>> warm_start = std::nullopt,
                                    const LobpcgOptions& options = {});

}  // namespace gml
