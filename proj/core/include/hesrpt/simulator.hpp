#pragma once

#include "hesrpt/core.hpp"
#include "hesrpt/policies.hpp"

#include <iosfwd>
#include <optional>

namespace hesrpt {

enum class EventKind { Arrival, Departure };

/// One simulator event plus the allocation in force immediately after it
/// (after the policy ran for the batch of events sharing this timestamp).
struct TraceEntry {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    int job_id = 0;
    AllocationVector alloc;
};

struct JobOutcome {
    int id = 0;
    double arrival = 0.0;
    double completion = 0.0;
    double flow_time = 0.0;
    double slowdown = 0.0;
};

struct SimResult {
    std::vector<JobOutcome> jobs;  // sorted by job id
    double mean_slowdown = 0.0;
    double mean_flow_time = 0.0;
    double total_weighted_flow_time = 0.0;
    std::vector<TraceEntry> trace;  // empty unless requested
};

struct SimOptions {
    bool record_trace = false;
    int quanta = 1000;
    double knee_alpha = 1.0;
};

/// Raised when a run cannot proceed: a policy emitted an invalid allocation,
/// or no job can ever depart and no arrival is pending (livelock).
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fraction of its own size below which a job's leftover work snaps to zero.
inline constexpr double kCompletionSnap = 1e-12;

/// Time until the first completion under a constant allocation, with the id
/// of the completing job (lowest id on exact ties).  Empty when no active
/// job holds a positive fraction.
std::optional<std::pair<int, double>> next_departure(std::span<const ActiveJob> active,
                                                     const AllocationVector& alloc,
                                                     const SpeedupParams& params);

/// Plays `policy` against the job set.  Events at one timestamp are batched:
/// departures first (by id), then arrivals (by id), then a single policy
/// decision.  Runs until every job has completed.
SimResult simulate(const std::vector<Job>& jobs, const Policy& policy,
                   const SpeedupParams& params, const WeightScheme& weights,
                   const SimOptions& opts = {});

/// Checks the rescaling identity: removing a fraction beta of the servers
/// and dividing every allocation by (1-beta) performs, in a machine whose
/// full rate is (1-beta)^p * s(N), exactly the same work on every job by the
/// horizon.  Phases must tile [0, horizon] and sum to 1-beta each.
bool speed_scale_equivalence_check(std::span<const Job> jobs,
                                   std::span<const SchedulePhase> schedule, double beta,
                                   double horizon, const SpeedupParams& params,
                                   double tol = 1e-10);

/// `job_id,arrival,completion,flow_time,slowdown` rows, sorted by id.
void write_result_csv(std::ostream& out, const SimResult& result);

/// `time,event,job_id,alloc_job_<id>...` with one allocation column per job.
void write_trace_csv(std::ostream& out, const SimResult& result, std::span<const Job> jobs);

}  // namespace hesrpt
