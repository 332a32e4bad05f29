#include "gml/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gml/lp.hpp"

namespace gml {
namespace {

constexpr double kAlignmentTol = 1e-8;

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void notify(const Observer& observer, const OptimizerEvent& event) {
    if (observer) {
        observer(event);
    }
}

// Step length toward the Frank-Wolfe vertex. `slope0` is the directional
// derivative at t = 0 (negative whenever the gap is positive).
double choose_step(const LineRestriction& line, double slope0, const OptimizerConfig& cfg, int k) {
    if (cfg.fw_step_rule == StepRule::Diminishing) {
        return 2.0 / (k + 2.0);
    }
    double gamma = 1.0;
    double hi_slope = line.slope(1.0);
    if (hi_slope > 0.0) {
        // Convex along the segment: bracket the stationary point and refine it
        // with Illinois regula falsi on the slope.
        double lo = 0.0;
        double hi = 1.0;
        double lo_slope = slope0;
        int side = 0;
        for (int it = 0; it < 100; ++it) {
            double t = (lo * hi_slope - hi * lo_slope) / (hi_slope - lo_slope);
            if (!(t > lo && t < hi)) {
                t = 0.5 * (lo + hi);
            }
            const double st = line.slope(t);
            gamma = t;
            if (std::abs(st) <= 1e-13 * std::abs(slope0) || hi - lo <= 1e-14) {
                break;
            }
            if (st < 0.0) {
                lo = t;
                lo_slope = st;
                if (side == -1) {
                    hi_slope *= 0.5;
                }
                side = -1;
            } else {
                hi = t;
                hi_slope = st;
                if (side == 1) {
                    lo_slope *= 0.5;
                }
                side = 1;
            }
        }
    }
    // Armijo sufficient decrease, halving until it holds.
    const double phi0 = line.value(0.0);
    for (int halving = 0; halving < 60; ++halving) {
        if (line.value(gamma) <= phi0 + cfg.armijo_c * gamma * slope0) {
            return gamma;
        }
        gamma *= 0.5;
    }
    return 0.0;
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        parent_[std::max(a, b)] = std::min(a, b);
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

SymmetricMatrix diagonal_direction(std::span<const double> d) { return SymmetricMatrix::diagonal(d); }

}  // namespace

std::string to_string(StepRule rule) { return rule == StepRule::LineSearch ? "line_search" : "diminishing"; }

StepRule parse_step_rule(const std::string& text) {
    if (text == "line_search") {
        return StepRule::LineSearch;
    }
    if (text == "diminishing") {
        return StepRule::Diminishing;
    }
    throw std::invalid_argument("unknown Frank-Wolfe step rule '" + text + "' (expected line_search or diminishing)");
}

OptimizerConfig OptimizerConfig::defaults_for(std::size_t dim) {
    OptimizerConfig cfg;
    cfg.trace_cap = static_cast<double>(dim);
    const double per_feature = cfg.trace_cap / static_cast<double>(dim);
    cfg.rho = 1e-4 * per_feature;
    cfg.epsilon = 1e-3 * per_feature;
    return cfg;
}

void OptimizerConfig::check(std::size_t dim) const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("OptimizerConfig: " + what); };
    if (dim < 2) {
        fail("at least two features are required");
    }
    if (!(trace_cap > 0.0) || !(rho > 0.0) || !(epsilon > 0.0)) {
        fail("trace_cap, rho and epsilon must be positive");
    }
    const double per_feature = trace_cap / static_cast<double>(dim);
    if (!(rho < per_feature)) {
        fail("rho must be below C/K");
    }
    if (!(per_feature > 2.0 * epsilon + rho)) {
        fail("C/K must exceed 2*epsilon + rho so the initial metric is feasible");
    }
    if (fw_max_iters < 1 || outer_max_iters < 1 || bcd_sweeps < 1) {
        fail("iteration budgets must be positive");
    }
    if (!(obj_rel_tol > 0.0)) {
        fail("obj_rel_tol must be positive");
    }
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
        fail("armijo_c must lie in (0, 1)");
    }
}

GraphMetric init_metric(const OptimizerConfig& cfg, std::size_t dim) {
    cfg.check(dim);
    SymmetricMatrix m(dim);
    const double diag = cfg.trace_cap / static_cast<double>(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m.set(i, i, diag);
        if (i + 1 < dim) {
            m.set(i, i + 1, -cfg.epsilon);
        }
    }
    return certify(m);
}

OptimizerState initial_state(GraphMetric metric, const Objective& objective) {
    EigenPair pair;
    pair.value = metric.lambda_min();
    pair.vector = metric.certificate().eigvec;
    pair.residual = eigen_residual(metric.matrix(), pair.vector, pair.value);
    GershgorinScalars scalars = alignment_scalars(metric);
    const double q = objective.value(metric.matrix());
    return OptimizerState{std::move(metric), std::move(scalars), std::move(pair), {q}, 0, 0, 0, {}};
}

OptimizerState update_scalars(OptimizerState state, const LobpcgOptions& options) {
    const SymmetricMatrix& m = state.metric.matrix();

    auto aligned = [&](const EigenPair& pair) {
        for (double v : pair.vector) {
            if (!(v > 0.0)) {
                return false;
            }
        }
        const auto ends = scaled_left_ends(m, alignment_scalars(pair.vector));
        const auto [lo, hi] = std::minmax_element(ends.begin(), ends.end());
        return *hi - *lo <= kAlignmentTol * std::max(1.0, std::abs(pair.value));
    };

    EigenPair pair;
    bool fallback = false;
    try {
        pair = smallest_eigenpair_lobpcg(m, std::span<const double>(state.eigpair.vector), options);
        state.last_lobpcg_iterations = pair.iterations;
        pair = refined_if_needed(m, std::move(pair));
        fallback = !aligned(pair);
    } catch (const LobpcgNotConverged& e) {
        state.last_lobpcg_iterations = e.best().iterations;
        fallback = true;
    }
    if (fallback) {
        ++state.lobpcg_fallbacks;
        pair = refined_if_needed(m, smallest_eigenpair_dense(m));
        for (double v : pair.vector) {
            if (v <= -1e-12) {
                RejectionReport report;
                report.lambda_min = pair.value;
                report.reasons.push_back(Violation::NonPositiveEigenvector);
                throw CertificationError(std::move(report));
            }
        }
    }
    // Throws CertificationError on any v_k <= 0.
    state.scalars = alignment_scalars(pair.vector);
    state.metric = validate_with_pair(m, pair).metric();
    state.eigpair = std::move(pair);
    return state;
}

OptimizerState diagonal_step(OptimizerState state, const Objective& objective, const OptimizerConfig& cfg,
                             const Observer& observer) {
    const std::size_t dim = state.metric.dim();
    SymmetricMatrix m = state.metric.matrix();

    std::vector<double> lower(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        lower[i] = scaled_radius(m, state.scalars, i) + cfg.rho;
    }

    double q = objective.value(m);
    double gap = 0.0;
    for (int k = 0; k < cfg.fw_max_iters; ++k) {
        const std::vector<double> grad = objective.grad_diag(m);
        const LPSolution vertex = solve_diagonal_lp(grad, lower, cfg.trace_cap);
        if (vertex.status != LPStatus::Optimal) {
            std::ostringstream os;
            os << "diagonal_step: Gershgorin lower bounds sum to "
               << std::accumulate(lower.begin(), lower.end(), 0.0) << " which exceeds the trace cap "
               << cfg.trace_cap << " (rho = " << cfg.rho << "); lower rho or raise C";
            throw OptimizerError(os.str());
        }
        std::vector<double> direction(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            direction[i] = vertex.point[i] - m(i, i);
        }
        const double slope0 = dot(grad, direction);
        gap = -slope0;
        if (gap <= cfg.obj_rel_tol * std::max(1.0, std::abs(q))) {
            break;
        }
        const SymmetricMatrix d = diagonal_direction(direction);
        const auto line = objective.along(m, d);
        const double gamma = choose_step(*line, slope0, cfg, k);
        if (gamma <= 0.0) {
            break;
        }
        m = m.axpy(gamma, d);
        q = objective.value(m);
        notify(observer, OptimizerEvent{EventKind::FrankWolfeIterate, state, &m, 0, gap, true});
    }

    state.metric = certify(m);
    state.objective_trace.push_back(q);
    notify(observer, OptimizerEvent{EventKind::DiagonalStep, state, &state.metric.matrix(), 0, gap, true});
    return state;
}

std::size_t strongest_neighbor(const SymmetricMatrix& m, std::size_t col) {
    std::size_t best = col == 0 ? 1 : 0;
    for (std::size_t r = 0; r < m.dim(); ++r) {
        if (r != col && std::abs(m(r, col)) > std::abs(m(best, col))) {
            best = r;
        }
    }
    return best;
}

std::vector<std::pair<std::size_t, std::size_t>> max_spanning_tree(const SymmetricMatrix& m) {
    struct Edge {
        double weight;
        std::size_t i;
        std::size_t j;
    };
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < m.dim(); ++i) {
        for (std::size_t j = i + 1; j < m.dim(); ++j) {
            if (std::abs(m(i, j)) > kConnectivityFloor) {
                edges.push_back({std::abs(m(i, j)), i, j});
            }
        }
    }
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.weight > b.weight; });
    DisjointSets sets(m.dim());
    std::vector<std::pair<std::size_t, std::size_t>> tree;
    for (const auto& e : edges) {
        if (sets.unite(e.i, e.j)) {
            tree.emplace_back(e.i, e.j);
        }
    }
    return tree;
}

OptimizerState offdiag_step(OptimizerState state, const Objective& objective, const OptimizerConfig& cfg,
                            std::size_t col, const Observer& observer) {
    const std::size_t dim = state.metric.dim();
    if (col >= dim) {
        throw std::out_of_range("offdiag_step: column index out of range");
    }
    SymmetricMatrix m = state.metric.matrix();
    const GershgorinScalars& s = state.scalars;

    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < dim; ++r) {
        if (r != col) {
            rows.push_back(r);
        }
    }
    const std::size_t n = rows.size();
    const std::size_t zeta = strongest_neighbor(m, col);

    std::vector<char> tree_edge(dim, 0);
    for (const auto& [i, j] : max_spanning_tree(m)) {
        if (i == col) {
            tree_edge[j] = 1;
        } else if (j == col) {
            tree_edge[i] = 1;
        }
    }

    // The LP works in scaled variables y_r = (s_col / s_r) m_{r,col}, the
    // entries of row col in B = S M S^{-1}. The scalar ratios can span many
    // orders of magnitude; in these units the only coupling row has unit
    // coefficients and the badly scaled factors end up in the variable bounds.
    LinearProgram lp = LinearProgram::with_variables(n);
    std::vector<double> ratio(n);
    double coupled_now = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t r = rows[k];
        ratio[k] = s[col] / s[r];
        const double current = ratio[k] * m(r, col);
        // Row r: (s_r / s_col) |m_{r,col}| = |y_r| / ratio^2 <= m_rr - rho - (rest of row r's scaled radius).
        const double room = m(r, r) - cfg.rho - scaled_radius(m, s, r, col);
        lp.lower_bounds[k] = std::min(-room * ratio[k] * ratio[k], current);
        lp.upper_bounds[k] = 0.0;
        if (r == zeta || tree_edge[r]) {
            // Irreducibility: the strongest edge keeps magnitude >= epsilon,
            // and no spanning-tree edge may shrink below min(epsilon, |current|).
            lp.upper_bounds[k] = std::max(current, -cfg.epsilon * ratio[k]);
        }
        coupled_now += current;
    }
    if (m(zeta, col) > -cfg.epsilon) {
        state.diagnostics.push_back("offdiag_step: column " + std::to_string(col) +
                                    " has no entry of magnitude epsilon; guard relaxed to the current value");
    }
    // Row col: sum_r |y_r| <= m_cc - rho. With every y_r <= 0 this already
    // implies y_r >= rhs, so looser bounds are clamped; otherwise a huge
    // ratio^2 bound would swamp the simplex's shifted coordinates.
    const double budget = std::min(-(m(col, col) - cfg.rho), coupled_now);
    lp.add(std::vector<double>(n, 1.0), Sense::GreaterEqual, budget);
    for (std::size_t k = 0; k < n; ++k) {
        lp.lower_bounds[k] = std::max(lp.lower_bounds[k], budget);
        lp.upper_bounds[k] = std::max(lp.upper_bounds[k], lp.lower_bounds[k]);
    }

    double q = objective.value(m);
    double gap = 0.0;
    for (int k = 0; k < cfg.fw_max_iters; ++k) {
        const std::vector<double> grad = objective.grad_offdiag_col(m, col);
        for (std::size_t j = 0; j < n; ++j) {
            lp.objective[j] = grad[j] / ratio[j];
        }
        const LPSolution vertex = solve_lp(lp);
        if (vertex.status != LPStatus::Optimal) {
            state.diagnostics.push_back("offdiag_step: column " + std::to_string(col) + " subproblem is " +
                                        to_string(vertex.status) + "; step skipped");
            notify(observer, OptimizerEvent{EventKind::OffDiagonalStep, state, &state.metric.matrix(), col, 0.0,
                                            false});
            return state;
        }
        SymmetricMatrix d(dim);
        std::vector<double> direction(n);
        for (std::size_t j = 0; j < n; ++j) {
            direction[j] = vertex.point[j] / ratio[j] - m(rows[j], col);
            d.set(rows[j], col, direction[j]);
        }
        const double slope0 = dot(grad, direction);
        gap = -slope0;
        if (gap <= cfg.obj_rel_tol * std::max(1.0, std::abs(q))) {
            break;
        }
        const auto line = objective.along(m, d);
        const double gamma = choose_step(*line, slope0, cfg, k);
        if (gamma <= 0.0) {
            break;
        }
        m = m.axpy(gamma, d);
        for (std::size_t j = 0; j < n; ++j) {
            // The segment endpoints satisfy the sign constraint; rounding must not flip it.
            m.set(rows[j], col, std::min(m(rows[j], col), 0.0));
        }
        q = objective.value(m);
        notify(observer, OptimizerEvent{EventKind::FrankWolfeIterate, state, &m, col, gap, false});
    }

    state.metric = certify(m);
    state.objective_trace.push_back(q);
    notify(observer, OptimizerEvent{EventKind::OffDiagonalStep, state, &state.metric.matrix(), col, gap, false});
    return state;
}

LearnResult learn_metric(const Objective& objective, const OptimizerConfig& cfg, const Observer& observer) {
    const std::size_t dim = objective.dim();
    cfg.check(dim);
    OptimizerState state = initial_state(init_metric(cfg, dim), objective);

    LearnResult result{state.metric, {}, {}, 0, false, {}};
    auto scalar_update = [&](OptimizerState st) {
        st = update_scalars(std::move(st), cfg.lobpcg);
        notify(observer, OptimizerEvent{EventKind::ScalarUpdate, st, &st.metric.matrix(), 0, 0.0, true});
        return st;
    };

    for (int outer = 1; outer <= cfg.outer_max_iters; ++outer) {
        const double before = state.objective_trace.back();
        double worst_gap = 0.0;
        auto track_gap = [&](const OptimizerEvent& e) {
            if (e.kind == EventKind::DiagonalStep || e.kind == EventKind::OffDiagonalStep) {
                worst_gap = std::max(worst_gap, e.fw_gap);
            }
            notify(observer, e);
        };

        state = scalar_update(std::move(state));
        state = diagonal_step(std::move(state), objective, cfg, track_gap);
        for (int sweep = 0; sweep < cfg.bcd_sweeps; ++sweep) {
            for (std::size_t col = 0; col < dim; ++col) {
                state = scalar_update(std::move(state));
                state = offdiag_step(std::move(state), objective, cfg, col, track_gap);
            }
        }
        state.iteration = outer;

        const double after = state.objective_trace.back();
        result.records.push_back(TraceRecord{outer, after, state.metric.lambda_min(),
                                             state.metric.matrix().trace(), worst_gap});
        notify(observer, OptimizerEvent{EventKind::OuterIteration, state, &state.metric.matrix(), 0, worst_gap, true});
        result.outer_iterations = outer;
        if (std::abs(before - after) <= cfg.obj_rel_tol * std::max(std::abs(before), 1e-300)) {
            result.converged = true;
            break;
        }
    }

    result.metric = state.metric;
    result.objective_trace = std::move(state.objective_trace);
    result.diagnostics = std::move(state.diagnostics);
    return result;
}

}  // namespace gml
