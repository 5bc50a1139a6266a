#pragma once

#include "hesrpt/core.hpp"

#include <optional>

namespace hesrpt {

/// A candidate schedule committed to one completion order: phase k runs a
/// constant allocation and ends when order[k] completes.  theta[k][j] is the
/// fraction of the machine given to order[k+j] during phase k (j = 0 is the
/// job completing at the end of this phase); each row sums to 1.
struct OrderedProblem {
    std::vector<int> order;
    std::vector<std::vector<double>> theta;
};

/// Weighted flow time of the candidate, or nullopt when some job other than
/// order[k] would finish strictly inside phase k (the order is violated).
/// Malformed theta (wrong shape, negative entries, rows not summing to 1)
/// throws instead.
std::optional<double> evaluate_order(const Instance& instance, const OrderedProblem& candidate);

struct OracleResult {
    OrderedProblem best;
    double objective = 0.0;
    bool order_is_sjf = false;
};

struct OracleOptions {
    /// Step of the initial grid over every free allocation variable.  For
    /// three or more jobs the joint grid is coarsened automatically until it
    /// fits eval_budget points per order; refinement recovers the precision.
    double resolution = 1.0 / 200;
    double refine_tol = 1e-8;
    std::size_t eval_budget = 200000;
    std::size_t max_jobs = 4;
    bool sjf_only = false;
};

/// Exhaustive search over completion orders and per-phase allocations.
/// Throws Refusal above max_jobs: the variable count grows quadratically
/// and the grid exponentially, so five jobs already need a different tool.
OracleResult brute_force_optimum(const Instance& instance, const OracleOptions& options = {});

/// Largest deviation, over jobs and phases, of the ratio
/// theta_i / (theta_i + sum of theta over jobs completing after i) from its
/// value in the job's first phase.  Zero when the candidate is scale-free.
double scale_free_deviation(const OrderedProblem& candidate);

}  // namespace hesrpt
