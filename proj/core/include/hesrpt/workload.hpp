#pragma once

#include "hesrpt/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <string_view>

namespace hesrpt {

struct SizeDist {
    enum class Kind { Pareto, Deterministic, Uniform };

    Kind kind = Kind::Deterministic;
    double a = 1.0;  // Pareto shape, uniform lower bound, or the fixed size
    double b = 1.0;  // Pareto scale (minimum value) or uniform upper bound

    static SizeDist pareto(double shape, double scale = 1.0);
    static SizeDist deterministic(double size);
    static SizeDist uniform(double lo, double hi);

    bool has_finite_mean() const noexcept;
    /// Throws std::domain_error for Pareto with shape <= 1.
    double mean() const;
};

struct ArrivalProcess {
    enum class Kind { AllAtZero, Poisson, TargetLoad };

    Kind kind = Kind::AllAtZero;
    double value = 0.0;  // Poisson rate lambda, or offered load rho

    static ArrivalProcess batch();
    static ArrivalProcess poisson(double lambda);
    /// Picks lambda = rho * s(N) / E[size] so the system runs at load rho.
    static ArrivalProcess target_load(double rho);
};

struct WorkloadSpec {
    int m_jobs = 0;
    SizeDist size_dist;
    ArrivalProcess arrivals;
    std::uint64_t seed = 0;
};

/// The generator driving all randomness; recorded in experiment outputs so
/// result files are reproducible across platforms.
inline constexpr std::string_view kRngName = "mt19937_64";

/// Seeded, platform-independent draw: all sizes first, then interarrival
/// times, each from one 64-bit engine output mapped into (0, 1).
std::vector<Job> generate(const WorkloadSpec& spec, const SpeedupParams& params);

/// `job_id,size,arrival_time` with a mandatory header, 17 significant
/// digits, LF newlines.
void write_instance_csv(std::ostream& out, std::span<const Job> jobs);
void write_instance_csv(const std::string& path, std::span<const Job> jobs);

/// Strict reader for the same format; malformed input raises ParseError
/// carrying the offending line number.
std::vector<Job> read_instance_csv(std::istream& in);
std::vector<Job> read_instance_csv(const std::string& path);

}  // namespace hesrpt
