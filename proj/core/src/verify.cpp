#include "gml/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gml/eigensolver.hpp"
#include "gml/graph_metric.hpp"
#include "gml/lp.hpp"
#include "gml/objective.hpp"
#include "gml/optimizer.hpp"
#include "gml/rng.hpp"

namespace gml {
namespace {

class Tally {
public:
    Tally(std::string name, double tolerance) {
        result_.name = std::move(name);
        result_.tolerance = tolerance;
    }

    // `measure` feeds the worst-case column; `ok` decides pass or fail.
    void record(double measure, bool ok, const std::string& where) {
        ++result_.checked;
        result_.worst = std::max(result_.worst, measure);
        if (!ok) {
            if (result_.failures == 0) {
                result_.first_failure = where;
            }
            ++result_.failures;
        }
    }

    PropertyResult result() const { return result_; }

private:
    PropertyResult result_;
};

std::string instance(std::size_t i, std::size_t dim) {
    std::ostringstream os;
    os << "instance " << i << " (K = " << dim << ")";
    return os.str();
}

}  // namespace

std::vector<PropertyResult> run_verification(const VerifyOptions& options) {
    Rng rng(options.seed);
    const std::size_t max_dim = std::max<std::size_t>(2, options.max_dim);

    Tally alignment("disc alignment spread / max(1, lambda)", 1e-8);
    Tally positivity("first eigenvector min entry > 1e-10 (negated min)", 1e-10);
    Tally gct("min Gershgorin left end <= lambda_min", 1e-12);
    Tally lobpcg("LOBPCG vs dense |d lambda| / max(1, lambda)", 1e-8);
    for (std::size_t i = 0; i < options.instances; ++i) {
        const auto dim = static_cast<std::size_t>(2 + uniform_index(rng, max_dim - 1));
        const SymmetricMatrix m = random_graph_metric(rng, dim);
        const EigenPair dense = smallest_eigenpair_dense(m);
        const double scale = std::max(1.0, std::abs(dense.value));

        const double min_v = *std::min_element(dense.vector.begin(), dense.vector.end());
        positivity.record(-min_v, min_v > 1e-10, instance(i, dim));
        if (min_v > 0.0) {
            const auto left = scaled_left_ends(m, alignment_scalars(dense.vector));
            const auto [lo, hi] = std::minmax_element(left.begin(), left.end());
            const double spread = (*hi - *lo) / scale;
            alignment.record(spread, spread < 1e-8, instance(i, dim));
        }
        const auto plain = gershgorin_left_ends(m);
        const double excess = *std::min_element(plain.begin(), plain.end()) - dense.value;
        gct.record(excess, excess <= 1e-12 * scale, instance(i, dim));

        try {
            const EigenPair it = smallest_eigenpair_lobpcg(m);
            const double err = std::abs(it.value - dense.value) / scale;
            lobpcg.record(err, err <= 1e-8, instance(i, dim));
        } catch (const LobpcgNotConverged& e) {
            lobpcg.record(std::abs(e.best().value - dense.value) / scale, false, instance(i, dim) + ": no convergence");
        }
    }

    Tally lp("closed-form diagonal LP vs simplex |d objective|", 1e-9);
    for (std::size_t i = 0; i < std::min<std::size_t>(options.instances, 500); ++i) {
        const auto n = static_cast<std::size_t>(1 + uniform_index(rng, 8));
        std::vector<double> grad(n);
        std::vector<double> lower(n);
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            grad[k] = uniform_real(rng, -2.0, 2.0);
            lower[k] = uniform_real(rng, 0.0, 1.0);
            total += lower[k];
        }
        const double cap = total + uniform_real(rng, 0.0, 2.0);
        const LPSolution closed = solve_diagonal_lp(grad, lower, cap);
        LinearProgram prog = LinearProgram::with_variables(n);
        prog.objective = grad;
        prog.lower_bounds = lower;
        prog.add(std::vector<double>(n, 1.0), Sense::LessEqual, cap);
        const LPSolution simplex = solve_lp(prog);
        const double diff = std::abs(closed.objective_value - simplex.objective_value);
        lp.record(diff, simplex.status == LPStatus::Optimal && diff <= 1e-9, instance(i, n));
    }

    Tally gradients("GLR gradients vs central differences (relative)", 1e-5);
    for (std::size_t i = 0; i < std::min<std::size_t>(options.instances, 100); ++i) {
        const auto dim = static_cast<std::size_t>(2 + uniform_index(rng, 5));
        const auto samples = random_binary_samples(rng, 12, dim);
        const ObjectiveContext ctx(samples.features, samples.labels);
        SymmetricMatrix m = random_graph_metric(rng, dim);
        m *= 0.3;
        const double h = 1e-5;
        std::vector<double> analytic = glr_grad_diag(ctx, m);
        std::vector<double> numeric(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            SymmetricMatrix up = m;
            SymmetricMatrix down = m;
            up.at(k, k) += h;
            down.at(k, k) -= h;
            numeric[k] = (glr_value(ctx, up) - glr_value(ctx, down)) / (2.0 * h);
        }
        const std::size_t col = static_cast<std::size_t>(uniform_index(rng, dim));
        const auto off = glr_grad_offdiag_col(ctx, m, col);
        analytic.insert(analytic.end(), off.begin(), off.end());
        for (std::size_t r = 0; r < dim; ++r) {
            if (r == col) {
                continue;
            }
            SymmetricMatrix up = m;
            SymmetricMatrix down = m;
            up.at(r, col) += h;
            down.at(r, col) -= h;
            numeric.push_back((glr_value(ctx, up) - glr_value(ctx, down)) / (2.0 * h));
        }
        double num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < analytic.size(); ++k) {
            num += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
            den += numeric[k] * numeric[k];
        }
        const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
        gradients.record(rel, rel <= 1e-5 || den == 0.0, instance(i, dim));
    }

    Tally feasible("optimizer iterates: lambda_min >= rho and trace <= C (violation)", 1e-9);
    Tally lemma2("scaled left ends >= rho after each scalar update (violation)", 1e-9);
    Tally monotone("line-search objective trace increase", 1e-10);
    for (std::size_t run = 0; run < options.optimizer_runs; ++run) {
        const auto dim = static_cast<std::size_t>(2 + uniform_index(rng, 5));
        const auto samples = random_binary_samples(rng, 30, dim);
        const GlrObjective objective(ObjectiveContext(samples.features, samples.labels));
        OptimizerConfig cfg = OptimizerConfig::defaults_for(dim);
        cfg.outer_max_iters = 5;
        const std::string where = "run " + std::to_string(run);
        auto observer = [&](const OptimizerEvent& ev) {
            if (ev.kind == EventKind::ScalarUpdate) {
                const auto left = scaled_left_ends(ev.state.metric.matrix(), ev.state.scalars);
                const double gap = cfg.rho - *std::min_element(left.begin(), left.end());
                lemma2.record(std::max(0.0, gap), gap <= 1e-9, where);
            } else if (ev.kind == EventKind::FrankWolfeIterate && ev.iterate != nullptr) {
                const double lam = smallest_eigenpair_dense(*ev.iterate).value;
                const double gap = std::max(cfg.rho - lam, ev.iterate->trace() - cfg.trace_cap);
                feasible.record(std::max(0.0, gap), gap <= 1e-9, where);
            }
        };
        const LearnResult result = learn_metric(objective, cfg, observer);
        for (std::size_t t = 1; t < result.objective_trace.size(); ++t) {
            const double rise = result.objective_trace[t] - result.objective_trace[t - 1];
            monotone.record(std::max(0.0, rise), rise <= 1e-10, where);
        }
    }

    return {alignment.result(), positivity.result(), gct.result(), lobpcg.result(),    lp.result(),
            gradients.result(), lemma2.result(),     feasible.result(), monotone.result()};
}

}  // namespace gml
