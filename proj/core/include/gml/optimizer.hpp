#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gml/eigensolver.hpp"
#include "gml/graph_metric.hpp"
#include "gml/objective.hpp"

namespace gml {

enum class StepRule { LineSearch, Diminishing };

std::string to_string(StepRule rule);
StepRule parse_step_rule(const std::string& text);

struct OptimizerConfig {
    double trace_cap = 1.0;     // C: tr(M) <= C
    double rho = 1e-4;          // margin kept between every scaled disc left end and zero
    double epsilon = 1e-3;      // initial path-graph weight and irreducibility floor
    int fw_max_iters = 100;
    int outer_max_iters = 50;
    int bcd_sweeps = 1;
    double obj_rel_tol = 1e-6;
    StepRule fw_step_rule = StepRule::LineSearch;
    double armijo_c = 1e-4;
    // Alignment quality scales with residual / min(v), so scalar updates
    // solve tighter than the eigensolver default.
    LobpcgOptions lobpcg{1e-12, 200};

    /// C = K, rho = 1e-4 C/K, epsilon = 1e-3 C/K.
    static OptimizerConfig defaults_for(std::size_t dim);

    /// Throws std::invalid_argument unless rho < C/K and C/K > 2 epsilon + rho
    /// (plus positivity of every field).
    void check(std::size_t dim) const;
};

struct OptimizerState {
    GraphMetric metric;
    GershgorinScalars scalars;
    EigenPair eigpair;  // first eigenpair behind `scalars`
    std::vector<double> objective_trace;
    int iteration = 0;
    int last_lobpcg_iterations = 0;
    int lobpcg_fallbacks = 0;
    std::vector<std::string> diagnostics;
};

enum class EventKind {
    ScalarUpdate,      // scalars were just re-aligned to the incumbent metric
    FrankWolfeIterate, // a Frank-Wolfe step was accepted; `iterate` is the new matrix
    DiagonalStep,      // diagonal_step finished
    OffDiagonalStep,   // offdiag_step finished (column in `column`)
    OuterIteration,    // one full alternation finished
};

struct OptimizerEvent {
    EventKind kind;
    const OptimizerState& state;
    const SymmetricMatrix* iterate = nullptr;
    std::size_t column = 0;
    double fw_gap = 0.0;
    bool diagonal = true;  // which block a FrankWolfeIterate belongs to
};

using Observer = std::function<void(const OptimizerEvent&)>;

/// One line of the per-outer-iteration log.
struct TraceRecord {
    int iteration = 0;
    double objective = 0.0;
    double lambda_min = 0.0;
    double trace = 0.0;
    double fw_gap = 0.0;
};

class OptimizerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Diagonal C/K, off-diagonals -epsilon on the path graph (j = i +- 1).
GraphMetric init_metric(const OptimizerConfig& cfg, std::size_t dim);

/// State for a certified starting metric: scalars aligned from its
/// certificate and the objective trace seeded with Q(metric).
OptimizerState initial_state(GraphMetric metric, const Objective& objective);

/// Re-solves the first eigenpair with LOBPCG warm-started from the previous
/// eigenvector (dense fallback on failure) and sets s = 1/v. Throws
/// CertificationError if the new eigenvector is not strictly positive.
OptimizerState update_scalars(OptimizerState state, const LobpcgOptions& options = {1e-12, 200});

/// Frank-Wolfe over the diagonal with the scaled Gershgorin lower bounds and
/// the trace cap as the feasible polytope.
OptimizerState diagonal_step(OptimizerState state, const Objective& objective, const OptimizerConfig& cfg,
                             const Observer& observer = {});

/// Frank-Wolfe over column `col`'s off-diagonal entries (mirrored into the row).
/// Infeasible subproblems leave the state unchanged and add a diagnostic.
OptimizerState offdiag_step(OptimizerState state, const Objective& objective, const OptimizerConfig& cfg,
                            std::size_t col, const Observer& observer = {});

struct LearnResult {
    GraphMetric metric;
    std::vector<double> objective_trace;
    std::vector<TraceRecord> records;
    int outer_iterations = 0;
    bool converged = false;
    std::vector<std::string> diagnostics;
};

/// Alternates scalar updates, the diagonal step, and a block-coordinate sweep
/// over the columns until the relative objective change over one alternation
/// drops to cfg.obj_rel_tol or cfg.outer_max_iters is reached.
LearnResult learn_metric(const Objective& objective, const OptimizerConfig& cfg, const Observer& observer = {});

/// Index of the largest-magnitude entry of column `col` (rows != col, lowest
/// index on ties).
std::size_t strongest_neighbor(const SymmetricMatrix& m, std::size_t col);

/// Edges (i, j), i < j, of a maximum-magnitude spanning tree of the graph of
/// off-diagonal entries; ties broken by (i, j) order.
std::vector<std::pair<std::size_t, std::size_t>> max_spanning_tree(const SymmetricMatrix& m);

}  // namespace gml
