#include "hesrpt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace hesrpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct LiveJob {
    int id;
    double size;
    double arrival;
    double remaining;
};

void validate_allocation(const AllocationVector& alloc, std::span<const LiveJob> active,
                         std::string_view policy_name) {
    for (const auto& [id, fraction] : alloc.entries()) {
        bool known = std::any_of(active.begin(), active.end(),
                                 [&](const LiveJob& j) { return j.id == id; });
        if (!known)
            throw SimulationError("policy " + std::string(policy_name) +
                                  " allocated to inactive job " + std::to_string(id));
        (void)fraction;  // range and sum were enforced by AllocationVector itself
    }
}

}  // namespace

std::optional<std::pair<int, double>> next_departure(std::span<const ActiveJob> active,
                                                     const AllocationVector& alloc,
                                                     const SpeedupParams& params) {
    int best_id = 0;
    double best_dt = kInf;
    for (const ActiveJob& j : active) {
        double f = alloc.fraction_of(j.id);
        if (f <= 0.0) continue;
        double dt = j.remaining / speedup(params, std::min(f, 1.0));
        if (dt < best_dt || (dt == best_dt && j.id < best_id)) {
            best_id = j.id;
            best_dt = dt;
        }
    }
    if (best_dt == kInf) return std::nullopt;
    return std::make_pair(best_id, best_dt);
}

SimResult simulate(const std::vector<Job>& jobs, const Policy& policy,
                   const SpeedupParams& params, const WeightScheme& weights,
                   const SimOptions& opts) {
    std::vector<LiveJob> pending;
    pending.reserve(jobs.size());
    std::unordered_set<int> seen;
    for (const Job& j : jobs) {
        if (!(j.size > 0.0) || !std::isfinite(j.size))
            throw std::invalid_argument("job size must be positive and finite");
        if (!(j.arrival_time >= 0.0) || !std::isfinite(j.arrival_time))
            throw std::invalid_argument("arrival time must be nonnegative and finite");
        if (!seen.insert(j.id).second)
            throw std::invalid_argument("duplicate job id " + std::to_string(j.id));
        weights.weight_of(j.id);
        pending.push_back({j.id, j.size, j.arrival_time, j.size});
    }
    std::sort(pending.begin(), pending.end(), [](const LiveJob& a, const LiveJob& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        return a.id < b.id;
    });

    SimResult result;
    result.jobs.reserve(jobs.size());
    if (jobs.empty()) return result;

    std::vector<LiveJob> active;
    AllocationVector alloc;
    std::size_t next_pending = 0;
    double now = pending.front().arrival;

    auto advance_work = [&](double dt) {
        if (dt <= 0.0) return;
        for (LiveJob& j : active) {
            double f = alloc.fraction_of(j.id);
            if (f <= 0.0) continue;
            j.remaining -= dt * speedup(params, std::min(f, 1.0));
            if (j.remaining <= j.size * kCompletionSnap) j.remaining = 0.0;
        }
    };

    while (!active.empty() || next_pending < pending.size()) {
        double next_arrival = next_pending < pending.size() ? pending[next_pending].arrival : kInf;
        double next_completion = kInf;
        if (!active.empty()) {
            // reuse next_departure's tie rule on a view of the active set
            std::vector<ActiveJob> view;
            view.reserve(active.size());
            for (const LiveJob& j : active) view.push_back({j.id, j.size, j.remaining, j.arrival});
            if (auto dep = next_departure(view, alloc, params)) next_completion = now + dep->second;
        }
        if (next_arrival == kInf && next_completion == kInf)
            throw SimulationError("livelock: " + std::string(policy.name()) +
                                  " allocates no servers and no arrival is pending");

        double event_time = std::min(next_arrival, next_completion);
        advance_work(event_time - now);
        now = event_time;

        // A residue can survive the snap yet drain in under one ulp of the
        // clock; such a completion time rounds to `now`, so finish the job
        // here instead of spinning on zero-length steps.
        for (LiveJob& j : active) {
            if (j.remaining <= 0.0) continue;
            double f = alloc.fraction_of(j.id);
            if (f <= 0.0) continue;
            if (now + j.remaining / speedup(params, std::min(f, 1.0)) <= now) j.remaining = 0.0;
        }

        std::vector<std::pair<EventKind, int>> batch;
        for (auto it = active.begin(); it != active.end();) {
            if (it->remaining <= 0.0) {
                result.jobs.push_back({it->id, it->arrival, now, now - it->arrival, 0.0});
                batch.emplace_back(EventKind::Departure, it->id);
                it = active.erase(it);
            } else {
                ++it;
            }
        }
        while (next_pending < pending.size() && pending[next_pending].arrival == now) {
            active.push_back(pending[next_pending]);
            batch.emplace_back(EventKind::Arrival, pending[next_pending].id);
            ++next_pending;
        }
        std::sort(active.begin(), active.end(),
                  [](const LiveJob& a, const LiveJob& b) { return a.id < b.id; });

        if (!active.empty()) {
            std::vector<ActiveJob> snapshot;
            snapshot.reserve(active.size());
            for (const LiveJob& j : active)
                snapshot.push_back({j.id, j.size, j.remaining, j.arrival});
            PolicyState state{std::move(snapshot), params, weights.kind(), opts.quanta,
                              opts.knee_alpha};
            alloc = policy.decide(state);
            validate_allocation(alloc, active, policy.name());
        } else {
            alloc = AllocationVector();
        }
        if (opts.record_trace)
            for (const auto& [kind, id] : batch) result.trace.push_back({now, kind, id, alloc});
    }

    std::sort(result.jobs.begin(), result.jobs.end(),
              [](const JobOutcome& a, const JobOutcome& b) { return a.id < b.id; });
    std::unordered_map<int, const Job*> by_id;
    by_id.reserve(jobs.size());
    for (const Job& j : jobs) by_id.emplace(j.id, &j);
    double slow_sum = 0.0, flow_sum = 0.0, weighted = 0.0;
    for (JobOutcome& o : result.jobs) {
        o.slowdown = slowdown_of(*by_id.at(o.id), o.completion, params);
        slow_sum += o.slowdown;
        flow_sum += o.flow_time;
        weighted += weights.weight_of(o.id) * o.flow_time;
    }
    result.mean_slowdown = slow_sum / result.jobs.size();
    result.mean_flow_time = flow_sum / result.jobs.size();
    result.total_weighted_flow_time = weighted;
    return result;
}

bool speed_scale_equivalence_check(std::span<const Job> jobs,
                                   std::span<const SchedulePhase> schedule, double beta,
                                   double horizon, const SpeedupParams& params, double tol) {
    if (!(beta >= 0.0) || !(beta < 1.0)) throw std::domain_error("beta must lie in [0, 1)");
    if (schedule.empty()) throw std::domain_error("empty schedule");
    double edge = 0.0;
    for (const SchedulePhase& ph : schedule) {
        if (std::abs(ph.start - edge) > 1e-9 * std::max(1.0, horizon))
            throw std::domain_error("schedule phases leave a gap or overlap");
        if (!(ph.end >= ph.start)) throw std::domain_error("phase ends before it starts");
        if (std::abs(ph.alloc.sum() - (1.0 - beta)) > 1e-9)
            throw std::domain_error("phase allocations must sum to 1 - beta");
        edge = ph.end;
    }
    if (std::abs(edge - horizon) > 1e-9 * std::max(1.0, horizon))
        throw std::domain_error("schedule does not reach the horizon");

    // shrunken machine: a beta fraction of the servers removed up front
    const double scaled_full = std::pow(1.0 - beta, params.p()) * params.rate_full();
    for (const Job& j : jobs) {
        double original = 0.0, rescaled = 0.0;
        for (const SchedulePhase& ph : schedule) {
            double len = ph.end - ph.start;
            double f = ph.alloc.fraction_of(j.id);
            if (len <= 0.0 || f <= 0.0) continue;
            original += len * speedup(params, std::min(f, 1.0));
            double stretched = std::min(f / (1.0 - beta), 1.0);
            rescaled += len * std::pow(stretched, params.p()) * scaled_full;
        }
        if (std::abs(original - rescaled) > tol * std::max({1.0, original, rescaled}))
            return false;
    }
    return true;
}

void write_result_csv(std::ostream& out, const SimResult& result) {
    out << "job_id,arrival,completion,flow_time,slowdown\n";
    for (const JobOutcome& o : result.jobs)
        out << o.id << ',' << format17(o.arrival) << ',' << format17(o.completion) << ','
            << format17(o.flow_time) << ',' << format17(o.slowdown) << '\n';
}

void write_trace_csv(std::ostream& out, const SimResult& result, std::span<const Job> jobs) {
    std::vector<int> ids;
    ids.reserve(jobs.size());
    for (const Job& j : jobs) ids.push_back(j.id);
    std::sort(ids.begin(), ids.end());
    out << "time,event,job_id";
    for (int id : ids) out << ",alloc_job_" << id;
    out << '\n';
    for (const TraceEntry& e : result.trace) {
        out << format17(e.time) << ','
            << (e.kind == EventKind::Arrival ? "arrival" : "departure") << ',' << e.job_id;
        for (int id : ids) out << ',' << format17(e.alloc.fraction_of(id));
        out << '\n';
    }
}

}  // namespace hesrpt
