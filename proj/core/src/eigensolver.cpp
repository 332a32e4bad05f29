#include "gml/eigensolver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace gml {
namespace {

Eigen::MatrixXd to_eigen(const SymmetricMatrix& m) {
    const auto n = static_cast<Eigen::Index>(m.dim());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }
    return out;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

Eigen::VectorXd apply(const SymmetricMatrix& m, const Eigen::VectorXd& x) {
    auto y = m.multiply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    return Eigen::Map<Eigen::VectorXd>(y.data(), x.size());
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Orthonormalizes `candidates` against each other (first column kept as is)
// with modified Gram-Schmidt; near-dependent columns are dropped.
Eigen::MatrixXd orthonormal_basis(const std::vector<Eigen::VectorXd>& candidates, double reorth_condition) {
    const auto n = candidates.front().size();
    const auto m = static_cast<Eigen::Index>(candidates.size());

    Eigen::MatrixXd raw(n, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        raw.col(k) = candidates[static_cast<std::size_t>(k)].normalized();
    }
    const Eigen::MatrixXd gram = raw.transpose() * raw;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(gram, Eigen::EigenvaluesOnly);
    const double lo = std::max(gram_eig.eigenvalues().minCoeff(), 0.0);
    const double hi = gram_eig.eigenvalues().maxCoeff();
    const int passes = (lo <= 0.0 || hi / lo > reorth_condition) ? 2 : 1;

    std::vector<Eigen::VectorXd> kept;
    kept.push_back(raw.col(0));
    for (Eigen::Index k = 1; k < m; ++k) {
        Eigen::VectorXd w = raw.col(k);
        for (int pass = 0; pass < passes; ++pass) {
            for (const auto& q : kept) {
                w -= q.dot(w) * q;
            }
        }
        const double len = w.norm();
        if (len > 1e-10) {
            kept.push_back(w / len);
        }
    }
    Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        basis.col(static_cast<Eigen::Index>(k)) = kept[k];
    }
    return basis;
}

EigenPair make_pair(const SymmetricMatrix& m, const Eigen::VectorXd& x, double lambda, int iterations) {
    EigenPair out;
    out.value = lambda;
    out.vector = to_std(x);
    normalize_sign(out.vector);
    out.residual = eigen_residual(m, out.vector, lambda);
    out.iterations = iterations;
    return out;
}

}  // namespace

double eigen_residual(const SymmetricMatrix& m, std::span<const double> v, double lambda) {
    auto mv = m.multiply(v);
    double s = 0.0;
    for (std::size_t i = 0; i < mv.size(); ++i) {
        const double d = mv[i] - lambda * v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

void normalize_sign(std::vector<double>& v) {
    for (double x : v) {
        if (x != 0.0) {
            if (x < 0.0) {
                for (double& y : v) {
                    y = -y;
                }
            }
            return;
        }
    }
}

EigenPair smallest_eigenpair_dense(const SymmetricMatrix& m) {
    if (m.dim() > kDenseEigenMaxDim) {
        throw std::invalid_argument("smallest_eigenpair_dense: dimension " + std::to_string(m.dim()) +
                                    " exceeds the dense limit of " + std::to_string(kDenseEigenMaxDim));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m));
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("smallest_eigenpair_dense: eigendecomposition failed");
    }
    return make_pair(m, solver.eigenvectors().col(0).normalized(), solver.eigenvalues()(0), 0);
}

LobpcgNotConverged::LobpcgNotConverged(EigenPair best)
    : std::runtime_error("LOBPCG did not converge (best residual " + std::to_string(best.residual) + ")"),
      best_(std::move(best)) {}

EigenPair smallest_eigenpair_lobpcg(const SymmetricMatrix& m, std::optional<std::span<const double>> warm_start,
                                    const LobpcgOptions& options) {
    const auto n = static_cast<Eigen::Index>(m.dim());

    Eigen::VectorXd x;
    if (warm_start) {
        if (warm_start->size() != m.dim()) {
            throw std::invalid_argument("smallest_eigenpair_lobpcg: warm start has the wrong dimension");
        }
        if (norm2(*warm_start) == 0.0) {
            throw std::invalid_argument("smallest_eigenpair_lobpcg: warm start has zero norm");
        }
        x = Eigen::Map<const Eigen::VectorXd>(warm_start->data(), n).normalized();
    } else {
        x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    }

    Eigen::VectorXd mx = apply(m, x);
    double lambda = x.dot(mx);
    Eigen::VectorXd r = mx - lambda * x;

    EigenPair best = make_pair(m, x, lambda, 0);
    if (best.residual <= options.tol) {
        return best;
    }

    Eigen::VectorXd p;
    for (int it = 1; it <= options.max_iters; ++it) {
        std::vector<Eigen::VectorXd> candidates{x, r};
        if (p.size() == n && p.norm() > 0.0) {
            candidates.push_back(p);
        }
        const Eigen::MatrixXd basis = orthonormal_basis(candidates, options.reorth_condition);

        Eigen::MatrixXd mb(n, basis.cols());
        for (Eigen::Index k = 0; k < basis.cols(); ++k) {
            mb.col(k) = apply(m, basis.col(k));
        }
        Eigen::MatrixXd projected = basis.transpose() * mb;
        projected = 0.5 * (projected + projected.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(projected);
        const Eigen::VectorXd y = ritz.eigenvectors().col(0);

        const Eigen::VectorXd x_new = basis * y;
        if (basis.cols() > 1) {
            p = basis.rightCols(basis.cols() - 1) * y.tail(basis.cols() - 1);
        } else {
            p.resize(0);
        }
        x = x_new.normalized();
        mx = apply(m, x);
        lambda = x.dot(mx);
        r = mx - lambda * x;

        EigenPair current = make_pair(m, x, lambda, it);
        if (current.residual < best.residual) {
            best = current;
        }
        if (current.residual <= options.tol) {
            return current;
        }
        best.iterations = it;
    }
    throw LobpcgNotConverged(std::move(best));
}

std::optional<EigenPair> refine_perron_pair(const SymmetricMatrix& m, const EigenPair& pair, int max_iters) {
    const std::size_t n = m.dim();
    if (pair.vector.size() != n) {
        throw std::invalid_argument("refine_perron_pair: eigenvector has the wrong dimension");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (m(i, j) > 0.0) {
                return std::nullopt;
            }
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(m));
    if (llt.info() != Eigen::Success) {
        return std::nullopt;
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        x(static_cast<Eigen::Index>(i)) = std::abs(pair.vector[i]);
    }
    if (!(x.norm() > 0.0)) {
        return std::nullopt;
    }
    x.normalize();
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd next = llt.solve(x);
        next.normalize();
        const double change = ((next - x).cwiseAbs().array() / next.array()).maxCoeff();
        x = std::move(next);
        if (change <= 1e-14) {
            break;
        }
    }
    if (!(x.minCoeff() > 0.0)) {
        return std::nullopt;
    }
    std::vector<double> v(x.data(), x.data() + x.size());
    const double rayleigh = m.quadratic_form(v);
    return make_pair(m, x, rayleigh, pair.iterations);
}

EigenPair refined_if_needed(const SymmetricMatrix& m, EigenPair pair) {
    if (pair.vector.empty()) {
        return pair;
    }
    const double smallest = *std::min_element(pair.vector.begin(), pair.vector.end());
    if (smallest >= kPerronRefineThreshold) {
        return pair;
    }
    if (auto refined = refine_perron_pair(m, pair)) {
        return std::move(*refined);
    }
    return pair;
}

}  // namespace gml
