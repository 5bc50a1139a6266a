#pragma once

#include "hesrpt/core.hpp"
#include "hesrpt/oracle.hpp"
#include "hesrpt/workload.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace hesrpt {

/// Candidate knee thresholds: `count` log-spaced values covering
/// [lo_rel, hi_rel] times the natural time scale (mean size / s(N)).
struct KneeGrid {
    double lo_rel = 1e-6;
    double hi_rel = 1e2;
    int count = 30;
};

std::vector<double> knee_alpha_grid(const KneeGrid& grid, double mean_size, double rate_full);

struct ExperimentConfig {
    std::vector<std::string> policies;  // empty: every policy fitting the mode
    std::vector<double> p_grid;
    double n_servers = 0.0;
    int m_jobs = 0;  // batch size offline, arrival count online
    SizeDist size_dist;
    WeightKind objective = WeightKind::Slowdown;
    int replications = 0;
    std::uint64_t seed = 1;
    std::string out_dir;  // empty: no files written
    int quanta = 1000;
    KneeGrid knee_grid;
    int threads = 0;  // 0: HESRPT_THREADS env var, then hardware concurrency

    // online-only knobs
    std::vector<double> load_grid;
    double warmup_fraction = 0.1;
    int measured_jobs = 0;  // 0: everything after warm-up

    static ExperimentConfig offline_defaults();
    static ExperimentConfig online_defaults();
};

struct CellResult {
    double p = 0.0;
    double rho = 0.0;  // meaningful online only
    std::string policy;
    double mean_slowdown = 0.0;
    double stderr_slowdown = 0.0;
    double mean_flow_time = 0.0;
    double stderr_flow_time = 0.0;
    double knee_alpha = 0.0;  // tuned threshold; 0 for other policies
};

struct CompareReport {
    std::vector<CellResult> rows;  // p-major, then load, then policy order
};

/// Batch comparison: `replications` seeded instances per p-cell, every
/// policy on the same instances; KNEE numbers come from the grid-tuned
/// threshold.  Writes offline_results.csv plus one chart per cell when
/// out_dir is set.
CompareReport compare_offline(const ExperimentConfig& config);

/// Poisson-arrival comparison over (p, load) cells.  The first
/// warmup_fraction of arrivals is discarded, the next measured_jobs count,
/// and later arrivals only drain the system.  Writes online_results.csv
/// plus charts when out_dir is set.
CompareReport compare_online(const ExperimentConfig& config);

void write_report_csv(std::ostream& out, const CompareReport& report, bool online,
                      const ExperimentConfig& config);

struct OracleSweepConfig {
    std::vector<int> m_values{2, 3};
    std::vector<double> p_grid{0.3, 0.5, 0.9};
    WeightKind objective = WeightKind::Slowdown;
    int instances_per_cell = 20;
    double n_servers = 100.0;
    SizeDist size_dist = SizeDist{SizeDist::Kind::Uniform, 0.5, 2.0};
    std::uint64_t seed = 1;
    OracleOptions oracle;
    int threads = 0;
};

struct OracleRow {
    std::uint64_t seed = 0;
    int m = 0;
    double p = 0.0;
    double objective_closed_form = 0.0;
    double objective_oracle = 0.0;
    double rel_gap = 0.0;
    bool order_is_sjf = false;
};

/// Exhaustive-search cross-check of the closed form on small seeded batches.
std::vector<OracleRow> oracle_comparison(const OracleSweepConfig& config);

void write_oracle_csv(std::ostream& out, std::span<const OracleRow> rows);

/// An explicit request wins, then the HESRPT_THREADS environment variable,
/// then hardware concurrency.
int resolve_threads(int requested);

}  // namespace hesrpt
