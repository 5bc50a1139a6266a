#pragma once

#include "hesrpt/core.hpp"

#include <memory>
#include <string_view>

namespace hesrpt {

/// What a policy sees of one job at a decision point.
struct ActiveJob {
    int id = 0;
    double size = 0.0;       // original size
    double remaining = 0.0;  // strictly positive while active
    double arrival_time = 0.0;
};

/// Snapshot handed to a policy whenever the active set changes.
struct PolicyState {
    std::vector<ActiveJob> active;  // sorted by job id, never empty
    SpeedupParams speedup;
    WeightKind objective = WeightKind::FlowTime;
    int quanta = 1000;        // G, granularity of the discrete heuristics
    double knee_alpha = 1.0;  // marginal-gain threshold for the knee heuristic
};

/// Stateless allocation rule.  decide() is a pure function of the state:
/// the same snapshot always yields the same fractions.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string_view name() const noexcept = 0;
    virtual AllocationVector decide(const PolicyState& state) const = 0;
};

/// Whole machine to the smallest remaining work, ties to the lowest id.
AllocationVector srpt_decide(const PolicyState& state);

/// 1/m to each of the m active jobs.
AllocationVector equi_decide(const PolicyState& state);

/// Greedy by "largest efficiency over remaining time": repeatedly hands a
/// batch of the G server quanta to the job maximizing s(k*N/G)/(k * rem_i)
/// jointly over jobs i and batch sizes k.
AllocationVector hell_decide(const PolicyState& state);

/// Gives each job quanta up to the knee of its speedup curve: the smallest
/// k where the marginal gain in completion time from one more quantum drops
/// below knee_alpha.  Jobs are served in ascending knee order until the G
/// quanta run out; leftovers go to the smallest remaining job.
AllocationVector knee_decide(const PolicyState& state);

/// Whole machine to the job minimizing remaining size times original size;
/// ties to the lowest id.  Coincides with SRPT on a batch.
AllocationVector rs_decide(const PolicyState& state);

/// Closed-form fractions recomputed over the current active set, ranked by
/// remaining work.  Weights follow `objective`: 1 for flow time,
/// s(N)/size for slowdown.  On a batch this reproduces the optimal
/// schedule exactly.
AllocationVector adaptive_hesrpt_decide(const PolicyState& state);

/// Known names: hesrpt | srpt | equi | hell | knee | rs.
/// Throws std::invalid_argument for anything else.
std::unique_ptr<Policy> make_policy(std::string_view name);

/// Picks the knee threshold minimizing the mean objective across the given
/// job batches, simulating each batch once per candidate alpha.  Ties keep
/// the earliest candidate.
double knee_tune_alpha(const std::vector<std::vector<Job>>& batches,
                       const SpeedupParams& params, WeightKind objective,
                       int quanta, std::span<const double> alpha_grid);

}  // namespace hesrpt
