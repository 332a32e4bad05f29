#include "gml/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gml {
namespace {

constexpr double kPivotTol = 1e-12;
constexpr double kCostTol = 1e-11;
constexpr int kDegenerateRunBeforeBland = 50;
constexpr int kMaxPivots = 50000;

// x_j = offset + sum over terms (sign * y_k)
struct VariableMap {
    double offset = 0.0;
    std::vector<std::pair<std::size_t, double>> terms;
};

class Tableau {
public:
    Tableau(Eigen::MatrixXd a, Eigen::VectorXd b, std::vector<std::size_t> basis)
        : a_(std::move(a)), b_(std::move(b)), basis_(std::move(basis)) {}

    // Minimizes costᵀz over the current tableau, with columns flagged in
    // `blocked` never allowed to enter. Returns false when unbounded.
    bool minimize(const Eigen::VectorXd& cost, const std::vector<char>& blocked, int& pivots, bool& used_bland) {
        int degenerate_run = 0;
        bool bland = false;
        while (true) {
            const Eigen::VectorXd reduced = reduced_costs(cost);
            std::ptrdiff_t entering = -1;
            double best = -kCostTol;
            for (Eigen::Index j = 0; j < reduced.size(); ++j) {
                if (blocked[static_cast<std::size_t>(j)] || is_basic(static_cast<std::size_t>(j))) {
                    continue;
                }
                if (bland) {
                    if (reduced(j) < -kCostTol) {
                        entering = j;
                        break;
                    }
                } else if (reduced(j) < best) {
                    best = reduced(j);
                    entering = j;
                }
            }
            if (entering < 0) {
                return true;
            }

            std::ptrdiff_t leaving = -1;
            double min_ratio = 0.0;
            for (Eigen::Index i = 0; i < a_.rows(); ++i) {
                const double coeff = a_(i, entering);
                if (coeff <= kPivotTol) {
                    continue;
                }
                const double ratio = std::max(b_(i), 0.0) / coeff;
                if (leaving < 0 || ratio < min_ratio - 1e-15 ||
                    (ratio <= min_ratio + 1e-15 && basis_[static_cast<std::size_t>(i)] <
                                                       basis_[static_cast<std::size_t>(leaving)])) {
                    leaving = i;
                    min_ratio = ratio;
                }
            }
            if (leaving < 0) {
                return false;
            }
            degenerate_run = (min_ratio <= 1e-15) ? degenerate_run + 1 : 0;
            if (degenerate_run > kDegenerateRunBeforeBland && !bland) {
                bland = true;
                used_bland = true;
            }
            pivot(leaving, entering);
            if (++pivots > kMaxPivots) {
                throw std::runtime_error("solve_lp: pivot limit exceeded");
            }
        }
    }

    void pivot(Eigen::Index row, Eigen::Index col) {
        const double p = a_(row, col);
        a_.row(row) /= p;
        b_(row) /= p;
        for (Eigen::Index i = 0; i < a_.rows(); ++i) {
            if (i != row && a_(i, col) != 0.0) {
                const double f = a_(i, col);
                a_.row(i) -= f * a_.row(row);
                b_(i) -= f * b_(row);
            }
        }
        basis_[static_cast<std::size_t>(row)] = static_cast<std::size_t>(col);
    }

    void drop_row(Eigen::Index row) {
        const Eigen::Index rows = a_.rows() - 1;
        Eigen::MatrixXd a(rows, a_.cols());
        Eigen::VectorXd b(rows);
        std::vector<std::size_t> basis;
        for (Eigen::Index i = 0, k = 0; i < a_.rows(); ++i) {
            if (i == row) {
                continue;
            }
            a.row(k) = a_.row(i);
            b(k) = b_(i);
            basis.push_back(basis_[static_cast<std::size_t>(i)]);
            ++k;
        }
        a_ = std::move(a);
        b_ = std::move(b);
        basis_ = std::move(basis);
    }

    Eigen::VectorXd values() const {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(a_.cols());
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            z(static_cast<Eigen::Index>(basis_[i])) = b_(static_cast<Eigen::Index>(i));
        }
        return z;
    }

    bool is_basic(std::size_t col) const { return std::find(basis_.begin(), basis_.end(), col) != basis_.end(); }

    const Eigen::MatrixXd& a() const { return a_; }
    const std::vector<std::size_t>& basis() const { return basis_; }

private:
    Eigen::VectorXd reduced_costs(const Eigen::VectorXd& cost) const {
        Eigen::VectorXd cb(static_cast<Eigen::Index>(basis_.size()));
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            cb(static_cast<Eigen::Index>(i)) = cost(static_cast<Eigen::Index>(basis_[i]));
        }
        return cost - a_.transpose() * cb;
    }

    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    std::vector<std::size_t> basis_;
};

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

std::string to_string(LPStatus status) {
    switch (status) {
        case LPStatus::Optimal:
            return "optimal";
        case LPStatus::Infeasible:
            return "infeasible";
        case LPStatus::Unbounded:
            return "unbounded";
    }
    return "unknown";
}

LinearProgram LinearProgram::with_variables(std::size_t n) {
    LinearProgram lp;
    lp.objective.assign(n, 0.0);
    lp.lower_bounds.assign(n, 0.0);
    lp.upper_bounds.assign(n, kInfinity);
    return lp;
}

void LinearProgram::add(std::vector<double> coefficients, Sense sense, double rhs) {
    constraints.push_back(LinearConstraint{std::move(coefficients), sense, rhs});
}

void LinearProgram::check() const {
    const std::size_t n = num_variables();
    if (n == 0) {
        throw std::invalid_argument("LinearProgram: no variables");
    }
    if (lower_bounds.size() != n || upper_bounds.size() != n) {
        throw std::invalid_argument("LinearProgram: bound vectors do not match the objective length");
    }
    std::vector<char> touched(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        if (lower_bounds[j] > upper_bounds[j]) {
            throw std::invalid_argument("LinearProgram: lower bound exceeds upper bound for variable " +
                                        std::to_string(j));
        }
        touched[j] = std::isfinite(lower_bounds[j]) || std::isfinite(upper_bounds[j]);
    }
    for (const auto& c : constraints) {
        if (c.coefficients.size() != n) {
            throw std::invalid_argument("LinearProgram: constraint row has the wrong dimension");
        }
        for (std::size_t j = 0; j < n; ++j) {
            touched[j] |= (c.coefficients[j] != 0.0);
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!touched[j]) {
            throw std::invalid_argument("LinearProgram: variable " + std::to_string(j) +
                                        " has neither a constraint nor a finite bound");
        }
    }
}

LPSolution solve_lp(const LinearProgram& lp) {
    lp.check();
    const std::size_t n = lp.num_variables();

    // Shift/split the original variables into non-negative ones.
    std::vector<VariableMap> maps(n);
    std::size_t ny = 0;
    std::vector<std::pair<std::size_t, double>> upper_rows;  // (y index, bound)
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lp.lower_bounds[j];
        const double hi = lp.upper_bounds[j];
        if (std::isfinite(lo)) {
            maps[j].offset = lo;
            maps[j].terms.emplace_back(ny, 1.0);
            if (std::isfinite(hi)) {
                upper_rows.emplace_back(ny, hi - lo);
            }
            ++ny;
        } else if (std::isfinite(hi)) {
            maps[j].offset = hi;
            maps[j].terms.emplace_back(ny++, -1.0);
        } else {
            maps[j].terms.emplace_back(ny++, 1.0);
            maps[j].terms.emplace_back(ny++, -1.0);
        }
    }

    const std::size_t rows = lp.constraints.size() + upper_rows.size();
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(ny));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows));
    std::vector<double> slack_sign(rows, 1.0);
    for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
        const auto& c = lp.constraints[i];
        double b = c.rhs;
        for (std::size_t j = 0; j < n; ++j) {
            b -= c.coefficients[j] * maps[j].offset;
            for (const auto& [k, sign] : maps[j].terms) {
                coeffs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) += sign * c.coefficients[j];
            }
        }
        rhs(static_cast<Eigen::Index>(i)) = b;
        slack_sign[i] = (c.sense == Sense::LessEqual) ? 1.0 : -1.0;
    }
    for (std::size_t u = 0; u < upper_rows.size(); ++u) {
        const auto i = static_cast<Eigen::Index>(lp.constraints.size() + u);
        coeffs(i, static_cast<Eigen::Index>(upper_rows[u].first)) = 1.0;
        rhs(i) = upper_rows[u].second;
    }

    // Columns: [y (ny) | slacks (rows) | artificials (as needed)].
    std::vector<std::size_t> needs_artificial;
    for (std::size_t i = 0; i < rows; ++i) {
        const bool flip = rhs(static_cast<Eigen::Index>(i)) < 0.0;
        if ((slack_sign[i] < 0.0) != flip) {
            needs_artificial.push_back(i);
        }
    }
    const std::size_t n_slack = rows;
    const std::size_t n_art = needs_artificial.size();
    const std::size_t cols = ny + n_slack + n_art;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows));
    std::vector<std::size_t> basis(rows);
    std::size_t art = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double flip = rhs(ii) < 0.0 ? -1.0 : 1.0;
        a.row(ii).head(static_cast<Eigen::Index>(ny)) = flip * coeffs.row(ii);
        a(ii, static_cast<Eigen::Index>(ny + i)) = flip * slack_sign[i];
        b(ii) = flip * rhs(ii);
        if (art < n_art && needs_artificial[art] == i) {
            const std::size_t col = ny + n_slack + art;
            a(ii, static_cast<Eigen::Index>(col)) = 1.0;
            basis[i] = col;
            ++art;
        } else {
            basis[i] = ny + i;
        }
    }

    LPSolution solution;
    Tableau tableau(std::move(a), std::move(b), std::move(basis));
    std::vector<char> blocked(cols, 0);

    if (n_art > 0) {
        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols));
        phase1.tail(static_cast<Eigen::Index>(n_art)).setOnes();
        tableau.minimize(phase1, blocked, solution.pivots, solution.used_bland);
        const Eigen::VectorXd z = tableau.values();
        const double infeasibility = z.tail(static_cast<Eigen::Index>(n_art)).sum();
        const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
        if (infeasibility > kLpFeasibilityTol * scale) {
            solution.status = LPStatus::Infeasible;
            return solution;
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(tableau.basis().size());) {
            if (tableau.basis()[static_cast<std::size_t>(i)] < ny + n_slack) {
                ++i;
                continue;
            }
            Eigen::Index col = -1;
            for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(ny + n_slack); ++j) {
                if (std::abs(tableau.a()(i, j)) > 1e-9) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) {
                tableau.pivot(i, col);
                ++i;
            } else {
                tableau.drop_row(i);  // redundant row
            }
        }
        std::fill(blocked.begin() + static_cast<std::ptrdiff_t>(ny + n_slack), blocked.end(), 1);
    }

    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols));
    for (std::size_t j = 0; j < n; ++j) {
        for (const auto& [k, sign] : maps[j].terms) {
            phase2(static_cast<Eigen::Index>(k)) += sign * lp.objective[j];
        }
    }
    if (!tableau.minimize(phase2, blocked, solution.pivots, solution.used_bland)) {
        solution.status = LPStatus::Unbounded;
        return solution;
    }

    const Eigen::VectorXd z = tableau.values();
    solution.point.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double x = maps[j].offset;
        for (const auto& [k, sign] : maps[j].terms) {
            x += sign * z(static_cast<Eigen::Index>(k));
        }
        solution.point[j] = x;
    }
    solution.objective_value = dot(lp.objective, solution.point);
    solution.status = LPStatus::Optimal;
    return solution;
}

LPSolution solve_diagonal_lp(std::span<const double> gradient, std::span<const double> lower_bounds,
                             double trace_cap) {
    if (gradient.size() != lower_bounds.size() || gradient.empty()) {
        throw std::invalid_argument("solve_diagonal_lp: gradient and bounds must have the same non-zero length");
    }
    LPSolution solution;
    const double total = std::accumulate(lower_bounds.begin(), lower_bounds.end(), 0.0);
    const double slack = trace_cap - total;
    if (slack < -kLpFeasibilityTol * std::max(1.0, std::abs(trace_cap))) {
        solution.status = LPStatus::Infeasible;
        return solution;
    }
    solution.point.assign(lower_bounds.begin(), lower_bounds.end());
    std::ptrdiff_t target = -1;
    for (std::size_t i = 0; i < gradient.size(); ++i) {
        if (gradient[i] < 0.0 && (target < 0 || gradient[i] < gradient[static_cast<std::size_t>(target)])) {
            target = static_cast<std::ptrdiff_t>(i);
        }
    }
    if (target >= 0 && slack > 0.0) {
        solution.point[static_cast<std::size_t>(target)] += slack;
    }
    solution.objective_value = dot(gradient, solution.point);
    solution.status = LPStatus::Optimal;
    return solution;
}

double max_violation(const LinearProgram& lp, std::span<const double> point) {
    double worst = 0.0;
    for (std::size_t j = 0; j < point.size(); ++j) {
        worst = std::max(worst, lp.lower_bounds[j] - point[j]);
        worst = std::max(worst, point[j] - lp.upper_bounds[j]);
    }
    for (const auto& c : lp.constraints) {
        const double lhs = dot(c.coefficients, point);
        worst = std::max(worst, c.sense == Sense::LessEqual ? lhs - c.rhs : c.rhs - lhs);
    }
    return worst;
}

std::size_t count_active(const LinearProgram& lp, std::span<const double> point, double tol) {
    std::size_t active = 0;
    for (std::size_t j = 0; j < point.size(); ++j) {
        active += std::isfinite(lp.lower_bounds[j]) && std::abs(point[j] - lp.lower_bounds[j]) <= tol;
        active += std::isfinite(lp.upper_bounds[j]) && std::abs(point[j] - lp.upper_bounds[j]) <= tol;
    }
    for (const auto& c : lp.constraints) {
        active += std::abs(dot(c.coefficients, point) - c.rhs) <= tol;
    }
    return active;
}

}  // namespace gml
