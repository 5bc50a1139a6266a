#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hesrpt {

/// Thrown when an input file cannot be parsed; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Thrown when a request is well formed but outside supported limits
/// (e.g. exhaustive search above the job-count cap).
class Refusal : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Accepted range for the speedup exponent.  The closed forms raise ratios to
/// the power 1/(1-p), which blows up as p -> 1, so near-degenerate exponents
/// are rejected up front.  Callers with a genuine need can widen the range.
struct ExponentBounds {
    double min = 0.01;
    double max = 0.995;
};

/// Sublinear speedup s(k) = k^p on N continuously divisible servers.
/// N is a positive real; it only ever enters results through s(N).
class SpeedupParams {
public:
    SpeedupParams(double p, double n_servers, ExponentBounds bounds = {});

    double p() const noexcept { return p_; }
    double n_servers() const noexcept { return n_; }
    /// s(N), the service rate of the whole machine.
    double rate_full() const noexcept { return rate_full_; }

private:
    double p_;
    double n_;
    double rate_full_;
};

/// Rate achieved by a job holding `fraction` in [0, 1] of the machine:
/// s(fraction * N) = fraction^p * s(N).
double speedup(const SpeedupParams& params, double fraction);

/// One unit of work.  `remaining` equals `size` until a simulator starts
/// driving it down; it never goes below zero or above `size`.
struct Job {
    int id = 0;
    double size = 0.0;
    double arrival_time = 0.0;
    double remaining = 0.0;
};

/// Validates and builds a fresh job with remaining == size.
Job make_job(int id, double size, double arrival_time = 0.0);

enum class WeightKind { Slowdown, FlowTime, Custom };

/// Positive per-job weights for the weighted flow time objective.
class WeightScheme {
public:
    /// w_i = 1 for every job.
    static WeightScheme flow_time(std::span<const Job> jobs);
    /// w_i = s(N) / x_i, so that w_i * T_i is job i's slowdown.
    static WeightScheme slowdown(std::span<const Job> jobs, const SpeedupParams& params);
    static WeightScheme custom(std::vector<std::pair<int, double>> weights);

    WeightKind kind() const noexcept { return kind_; }
    /// Throws std::out_of_range for an unknown job id.
    double weight_of(int job_id) const;
    /// Sorted by job id.
    const std::vector<std::pair<int, double>>& entries() const noexcept { return weights_; }

private:
    WeightScheme(WeightKind kind, std::vector<std::pair<int, double>> weights);

    WeightKind kind_;
    std::vector<std::pair<int, double>> weights_;
};

/// Per-job server fractions at one instant.  Entries are sorted by job id;
/// a job without an entry holds zero.  Each fraction lies in [0, 1] and the
/// total never exceeds 1 beyond kSumSlack.
class AllocationVector {
public:
    static constexpr double kSumSlack = 1e-12;

    AllocationVector() = default;
    explicit AllocationVector(std::vector<std::pair<int, double>> entries);

    double fraction_of(int job_id) const noexcept;
    double sum() const noexcept;
    const std::vector<std::pair<int, double>>& entries() const noexcept { return entries_; }

private:
    std::vector<std::pair<int, double>> entries_;
};

/// Constant allocation over the half-open interval [start, end).
struct SchedulePhase {
    double start = 0.0;
    double end = 0.0;
    AllocationVector alloc;
};

/// An allocation problem: jobs plus speedup plus objective weights.
/// Jobs are kept in canonical order: size descending, ties by ascending id,
/// so rank 1 (index 0) is the largest job and rank M the smallest.
class Instance {
public:
    Instance(std::vector<Job> jobs, SpeedupParams speedup, WeightScheme weights);

    const std::vector<Job>& jobs() const noexcept { return jobs_; }
    const SpeedupParams& speedup() const noexcept { return speedup_; }
    const WeightScheme& weights() const noexcept { return weights_; }
    std::size_t job_count() const noexcept { return jobs_.size(); }
    /// Weight of the rank-k job, 1-based.
    double weight_of_rank(std::size_t k) const;

private:
    std::vector<Job> jobs_;
    SpeedupParams speedup_;
    WeightScheme weights_;
    std::vector<double> z_;  // z_[k] = sum of the k largest jobs' weights

    friend double z_prefix(const Instance&, std::size_t);
};

/// z(k) = sum of weights of the k largest jobs; z(0) = 0.
double z_prefix(const Instance& instance, std::size_t k);

/// True when weights are non-decreasing in canonical order, i.e. smaller
/// jobs never weigh less than larger ones.  The closed forms require this.
bool weights_favor_small_jobs(const Instance& instance);

/// (completion - arrival) / (size / s(N)): flow time over the time the job
/// would take alone on the whole machine.
double slowdown_of(const Job& job, double completion_time, const SpeedupParams& params);

/// Least-squares fit of p from (k, measured speedup) pairs via
/// log s = p log k, clamped into `bounds`.  Needs at least two distinct
/// abscissae greater than zero.
double fit_speedup(std::span<const std::pair<double, double>> points,
                   ExponentBounds bounds = {});

}  // namespace hesrpt
