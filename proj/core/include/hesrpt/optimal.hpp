#pragma once

#include "hesrpt/core.hpp"

namespace hesrpt {

/// The scale-free constants of the optimal policy.  omegas[k-1] holds
/// omega_k: the ratio of the combined allocation of the k-1 larger jobs to
/// the rank-k job's own allocation, constant while k or more jobs remain.
/// omega_1 = 0 because the largest job shares with nobody above it.
struct ScaleFreeConstants {
    std::vector<double> omegas;
};

struct OfflineSchedule {
    std::vector<SchedulePhase> phases;               // tile [0, makespan]
    std::vector<std::pair<int, double>> completions;  // (job id, time), sorted by id
    double objective = 0.0;                           // weighted flow time
};

/// Fractions theta_1..theta_m for the m active jobs, given their weights in
/// canonical order (index 0 = largest job).  theta_i = (z(i)/z(m))^(1/(1-p))
/// - (z(i-1)/z(m))^(1/(1-p)); the result sums to 1 and strictly increases
/// when weights are non-decreasing.
std::vector<double> allocation_fractions(std::span<const double> weights, double p);

/// omega_k = 1 / ((z(k)/z(k-1))^(1/(1-p)) - 1) for k >= 2, omega_1 = 0.
std::vector<double> scale_free_omegas(std::span<const double> weights, double p);

ScaleFreeConstants optimal_omegas(const Instance& instance);

/// Allocation when the `active_count` largest jobs (canonical ranks 1..m)
/// remain; offline the smaller jobs have already finished and left.
AllocationVector optimal_allocation(const Instance& instance, std::size_t active_count);

/// Minimal weighted flow time for a batch (all arrivals at time zero):
///   (1/s(N)) * sum_k x_k * (z(k)^q - z(k-1)^q)^(1-p),  q = 1/(1-p).
double optimal_flow_time(const Instance& instance);

/// The full optimal schedule for a batch: M phases, smallest job first out,
/// allocations redistributed after each departure.
OfflineSchedule offline_schedule(const Instance& instance);

}  // namespace hesrpt
