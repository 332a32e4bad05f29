#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gml {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kLpFeasibilityTol = 1e-9;

enum class Sense { LessEqual, GreaterEqual };

struct LinearConstraint {
    std::vector<double> coefficients;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

/// minimize cᵀx subject to the constraint rows and per-variable bounds.
/// Bounds may be infinite (-kInfinity / kInfinity).
struct LinearProgram {
    std::vector<double> objective;
    std::vector<LinearConstraint> constraints;
    std::vector<double> lower_bounds;
    std::vector<double> upper_bounds;

    /// n variables, no constraints, bounds [0, +inf).
    static LinearProgram with_variables(std::size_t n);

    std::size_t num_variables() const noexcept { return objective.size(); }
    void add(std::vector<double> coefficients, Sense sense, double rhs);

    /// Throws std::invalid_argument for mismatched dimensions, inverted
    /// bounds, or a variable touched by neither a constraint nor a finite bound.
    void check() const;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

std::string to_string(LPStatus status);

struct LPSolution {
    std::vector<double> point;
    double objective_value = 0.0;
    LPStatus status = LPStatus::Infeasible;
    int pivots = 0;
    bool used_bland = false;
};

/// Two-phase dense-tableau simplex. Dantzig pricing with lowest-index ratio
/// tie-breaking; switches to Bland's rule after a run of degenerate pivots.
/// Deterministic for identical input.
LPSolution solve_lp(const LinearProgram& lp);

/// Closed-form vertex optimum of
///   minimize gᵀx  s.t.  x_i >= lower_i,  sum_i x_i <= trace_cap.
/// Every variable sits at its lower bound and the remaining slack goes to the
/// most negative gradient entry (lowest index on ties; nowhere if all >= 0).
LPSolution solve_diagonal_lp(std::span<const double> gradient, std::span<const double> lower_bounds,
                             double trace_cap);

/// Largest violation of any constraint or bound at `point` (0 when feasible).
double max_violation(const LinearProgram& lp, std::span<const double> point);

/// Number of constraints and finite bounds active at `point` within `tol`.
std::size_t count_active(const LinearProgram& lp, std::span<const double> point, double tol = 1e-9);

}  // namespace gml
