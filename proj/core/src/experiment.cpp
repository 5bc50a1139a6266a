#include "hesrpt/experiment.hpp"

#include "hesrpt/optimal.hpp"
#include "hesrpt/policies.hpp"
#include "hesrpt/simulator.hpp"
#include "hesrpt/svg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace hesrpt {

namespace {

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string formatg(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

/// Runs fn(0..count) across a small pool; results must go into preallocated
/// slots so the outcome is identical no matter how work interleaves.
void run_tasks(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    std::size_t pool_size =
        std::min(static_cast<std::size_t>(resolve_threads(threads)), count);
    if (pool_size <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex fail_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(fail_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(pool_size);
    for (std::size_t t = 0; t < pool_size; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct RepMetrics {
    double mean_slowdown = 0.0;
    double mean_flow_time = 0.0;
};

double pick_objective(const RepMetrics& m, WeightKind objective) {
    return objective == WeightKind::Slowdown ? m.mean_slowdown : m.mean_flow_time;
}

struct Aggregate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

Aggregate aggregate(std::span<const double> xs) {
    Aggregate a;
    for (double x : xs) a.mean += x;
    a.mean /= xs.size();
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - a.mean) * (x - a.mean);
        a.stderr_ = std::sqrt(ss / (xs.size() - 1) / xs.size());
    }
    return a;
}

std::vector<std::string> policies_or_default(const ExperimentConfig& cfg, bool online) {
    if (!cfg.policies.empty()) {
        for (const std::string& name : cfg.policies) make_policy(name);  // validate early
        return cfg.policies;
    }
    if (online) return {"hesrpt", "srpt", "equi", "hell", "knee", "rs"};
    return {"hesrpt", "srpt", "equi", "hell", "knee"};
}

void validate_common(const ExperimentConfig& cfg) {
    if (cfg.p_grid.empty()) throw std::invalid_argument("p grid must be nonempty");
    if (cfg.replications < 1) throw std::invalid_argument("need at least one replication");
    if (cfg.m_jobs < 1) throw std::invalid_argument("need at least one job");
    if (cfg.knee_grid.count < 1) throw std::invalid_argument("knee grid must be nonempty");
    for (double p : cfg.p_grid) SpeedupParams(p, cfg.n_servers);
}

RepMetrics measure(const SimResult& r, int first_id, int count) {
    RepMetrics m;
    int used = 0;
    for (const JobOutcome& o : r.jobs) {
        if (o.id < first_id || o.id >= first_id + count) continue;
        m.mean_slowdown += o.slowdown;
        m.mean_flow_time += o.flow_time;
        ++used;
    }
    m.mean_slowdown /= used;
    m.mean_flow_time /= used;
    return m;
}

CompareReport sweep(const ExperimentConfig& cfg, bool online) {
    validate_common(cfg);
    const std::vector<std::string> policies = policies_or_default(cfg, online);
    const std::vector<double> loads = online ? cfg.load_grid : std::vector<double>{0.0};
    if (online && loads.empty()) throw std::invalid_argument("load grid must be nonempty");

    int warmup = 0, measured = cfg.m_jobs;
    if (online) {
        warmup = static_cast<int>(std::llround(cfg.warmup_fraction * cfg.m_jobs));
        measured = cfg.measured_jobs > 0 ? cfg.measured_jobs : cfg.m_jobs - warmup;
        if (measured < 1) throw std::invalid_argument("measurement window is empty");
        if (warmup + measured > cfg.m_jobs)
            throw std::invalid_argument("warm-up plus measured jobs exceed the arrival count");
    }

    auto knee_it = std::find(policies.begin(), policies.end(), "knee");
    const bool has_knee = knee_it != policies.end();

    struct Cell {
        double p;
        double rho;
    };
    std::vector<Cell> cells;
    for (double p : cfg.p_grid)
        for (double rho : loads) cells.push_back({p, rho});

    // lanes: one per non-knee policy, plus one per knee alpha candidate
    std::vector<std::string> lane_policy;
    std::vector<double> lane_alpha;
    std::vector<std::vector<double>> cell_alphas(cells.size());

    // offline instances are p-independent; generate one batch per rep and
    // share it across cells.  Online instances depend on (p, rho) via the
    // arrival rate, so they are generated inside each task.
    std::vector<std::vector<Job>> shared_batches;
    double mean_size_for_grid = 0.0;
    if (!online) {
        shared_batches.resize(cfg.replications);
        double total = 0.0;
        std::size_t n = 0;
        for (int rep = 0; rep < cfg.replications; ++rep) {
            WorkloadSpec spec{cfg.m_jobs, cfg.size_dist, ArrivalProcess::batch(),
                              cfg.seed + static_cast<std::uint64_t>(rep)};
            shared_batches[rep] = generate(spec, SpeedupParams(cfg.p_grid.front(), cfg.n_servers));
            for (const Job& j : shared_batches[rep]) total += j.size;
            n += shared_batches[rep].size();
        }
        mean_size_for_grid = total / static_cast<double>(n);
    } else {
        // the size distribution must have a mean for target-load arrivals
        mean_size_for_grid = cfg.size_dist.mean();
    }

    std::size_t lanes = 0;
    for (const std::string& name : policies)
        if (name != "knee") ++lanes;
    std::size_t knee_lane_start = lanes;
    if (has_knee) lanes += static_cast<std::size_t>(cfg.knee_grid.count);

    for (std::size_t c = 0; c < cells.size(); ++c) {
        SpeedupParams params(cells[c].p, cfg.n_servers);
        cell_alphas[c] = knee_alpha_grid(cfg.knee_grid, mean_size_for_grid, params.rate_full());
    }

    const std::size_t reps = static_cast<std::size_t>(cfg.replications);
    const std::size_t task_count = cells.size() * lanes * reps;
    std::vector<RepMetrics> slots(task_count);

    auto run_one = [&](std::size_t task) {
        const std::size_t c = task / (lanes * reps);
        const std::size_t lane = (task / reps) % lanes;
        const int rep = static_cast<int>(task % reps);

        SpeedupParams params(cells[c].p, cfg.n_servers);
        std::string policy_name;
        SimOptions opts;
        opts.quanta = cfg.quanta;
        if (lane >= knee_lane_start && has_knee) {
            policy_name = "knee";
            opts.knee_alpha = cell_alphas[c][lane - knee_lane_start];
        } else {
            std::size_t seen = 0;
            for (const std::string& name : policies) {
                if (name == "knee") continue;
                if (seen == lane) {
                    policy_name = name;
                    break;
                }
                ++seen;
            }
        }
        auto policy = make_policy(policy_name);

        const std::vector<Job>* batch;
        std::vector<Job> own;
        if (online) {
            WorkloadSpec spec{cfg.m_jobs, cfg.size_dist,
                              ArrivalProcess::target_load(cells[c].rho),
                              cfg.seed + static_cast<std::uint64_t>(rep)};
            own = generate(spec, params);
            batch = &own;
        } else {
            batch = &shared_batches[rep];
        }
        WeightScheme weights = cfg.objective == WeightKind::Slowdown
                                   ? WeightScheme::slowdown(*batch, params)
                                   : WeightScheme::flow_time(*batch);
        SimResult r = simulate(*batch, *policy, params, weights, opts);
        slots[task] = online ? measure(r, warmup, measured)
                             : measure(r, 0, static_cast<int>(batch->size()));
    };
    run_tasks(task_count, cfg.threads, run_one);

    CompareReport report;
    auto slot_at = [&](std::size_t c, std::size_t lane, std::size_t rep) -> const RepMetrics& {
        return slots[c * lanes * reps + lane * reps + rep];
    };
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::size_t normal_lane = 0;
        for (const std::string& name : policies) {
            CellResult row;
            row.p = cells[c].p;
            row.rho = cells[c].rho;
            row.policy = name;
            std::size_t lane;
            if (name == "knee") {
                // pick the threshold with the best mean objective
                std::size_t best_a = 0;
                double best_score = std::numeric_limits<double>::infinity();
                for (std::size_t a = 0; a < cell_alphas[c].size(); ++a) {
                    double score = 0.0;
                    for (std::size_t rep = 0; rep < reps; ++rep)
                        score += pick_objective(slot_at(c, knee_lane_start + a, rep),
                                                cfg.objective);
                    if (score < best_score) {
                        best_score = score;
                        best_a = a;
                    }
                }
                lane = knee_lane_start + best_a;
                row.knee_alpha = cell_alphas[c][best_a];
            } else {
                lane = normal_lane++;
            }
            std::vector<double> slow(reps), flow(reps);
            for (std::size_t rep = 0; rep < reps; ++rep) {
                slow[rep] = slot_at(c, lane, rep).mean_slowdown;
                flow[rep] = slot_at(c, lane, rep).mean_flow_time;
            }
            Aggregate s = aggregate(slow), f = aggregate(flow);
            row.mean_slowdown = s.mean;
            row.stderr_slowdown = s.stderr_;
            row.mean_flow_time = f.mean;
            row.stderr_flow_time = f.stderr_;
            report.rows.push_back(std::move(row));
        }
    }

    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        const std::string csv_name = online ? "online_results.csv" : "offline_results.csv";
        std::ofstream csv(fs::path(cfg.out_dir) / csv_name, std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write results CSV under " + cfg.out_dir);
        write_report_csv(csv, report, online, cfg);

        const std::string metric =
            cfg.objective == WeightKind::Slowdown ? "mean slowdown" : "mean flow time";
        for (std::size_t c = 0; c < cells.size(); ++c) {
            BarChartSpec chart;
            chart.title = metric + ", p=" + formatg(cells[c].p);
            if (online) chart.title += ", load=" + formatg(cells[c].rho);
            chart.y_label = metric;
            chart.log_scale = online;
            for (const CellResult& row : report.rows) {
                if (row.p != cells[c].p || row.rho != cells[c].rho) continue;
                chart.labels.push_back(row.policy);
                chart.values.push_back(cfg.objective == WeightKind::Slowdown ? row.mean_slowdown
                                                                             : row.mean_flow_time);
                chart.errors.push_back(cfg.objective == WeightKind::Slowdown
                                           ? row.stderr_slowdown
                                           : row.stderr_flow_time);
            }
            std::string name = online ? "online_p" + formatg(cells[c].p) + "_rho" +
                                            formatg(cells[c].rho) + ".svg"
                                      : "offline_p" + formatg(cells[c].p) + ".svg";
            write_bar_chart((fs::path(cfg.out_dir) / name).string(), chart);
        }
    }
    return report;
}

}  // namespace

std::vector<double> knee_alpha_grid(const KneeGrid& grid, double mean_size, double rate_full) {
    if (grid.count < 1) throw std::invalid_argument("knee grid must be nonempty");
    if (!(grid.lo_rel > 0.0) || !(grid.hi_rel >= grid.lo_rel))
        throw std::invalid_argument("knee grid bounds must satisfy 0 < lo <= hi");
    const double scale = mean_size / rate_full;
    std::vector<double> alphas(grid.count);
    if (grid.count == 1) {
        alphas[0] = grid.lo_rel * scale;
        return alphas;
    }
    const double log_lo = std::log(grid.lo_rel), log_hi = std::log(grid.hi_rel);
    for (int i = 0; i < grid.count; ++i)
        alphas[i] = scale * std::exp(log_lo + (log_hi - log_lo) * i / (grid.count - 1));
    return alphas;
}

ExperimentConfig ExperimentConfig::offline_defaults() {
    ExperimentConfig cfg;
    cfg.p_grid = {0.05, 0.25, 0.5, 0.75, 0.9, 0.99};
    cfg.n_servers = 1e6;
    cfg.m_jobs = 500;
    cfg.size_dist = SizeDist::pareto(0.8);
    cfg.objective = WeightKind::Slowdown;
    cfg.replications = 20;
    return cfg;
}

ExperimentConfig ExperimentConfig::online_defaults() {
    ExperimentConfig cfg;
    cfg.p_grid = {0.1, 0.5, 0.9};
    cfg.n_servers = 1e4;
    cfg.m_jobs = 10000;
    cfg.size_dist = SizeDist::pareto(1.5);
    cfg.objective = WeightKind::Slowdown;
    cfg.replications = 10;
    cfg.load_grid = {0.4, 0.8};
    return cfg;
}

CompareReport compare_offline(const ExperimentConfig& config) { return sweep(config, false); }

CompareReport compare_online(const ExperimentConfig& config) { return sweep(config, true); }

void write_report_csv(std::ostream& out, const CompareReport& report, bool online,
                      const ExperimentConfig& config) {
    out << "p," << (online ? "rho," : "")
        << "policy,mean_slowdown,stderr_slowdown,mean_flow_time,stderr_flow_time,"
           "knee_alpha,quanta_g,seed,rng\n";
    for (const CellResult& row : report.rows) {
        out << format17(row.p) << ',';
        if (online) out << format17(row.rho) << ',';
        out << row.policy << ',' << format17(row.mean_slowdown) << ','
            << format17(row.stderr_slowdown) << ',' << format17(row.mean_flow_time) << ','
            << format17(row.stderr_flow_time) << ','
            << (row.policy == "knee" ? format17(row.knee_alpha) : std::string()) << ','
            << config.quanta << ',' << config.seed << ',' << kRngName << '\n';
    }
}

std::vector<OracleRow> oracle_comparison(const OracleSweepConfig& config) {
    if (config.instances_per_cell < 1)
        throw std::invalid_argument("need at least one instance per cell");
    struct Task {
        int m;
        double p;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (int m : config.m_values)
        for (double p : config.p_grid)
            for (int rep = 0; rep < config.instances_per_cell; ++rep)
                tasks.push_back({m, p, config.seed + static_cast<std::uint64_t>(rep)});

    std::vector<OracleRow> rows(tasks.size());
    run_tasks(tasks.size(), config.threads, [&](std::size_t i) {
        const Task& t = tasks[i];
        SpeedupParams params(t.p, config.n_servers);
        WorkloadSpec spec{t.m, config.size_dist, ArrivalProcess::batch(), t.seed};
        std::vector<Job> jobs = generate(spec, params);
        WeightScheme weights = config.objective == WeightKind::Slowdown
                                   ? WeightScheme::slowdown(jobs, params)
                                   : WeightScheme::flow_time(jobs);
        Instance instance(jobs, params, weights);
        OracleResult oracle = brute_force_optimum(instance, config.oracle);
        OracleRow row;
        row.seed = t.seed;
        row.m = t.m;
        row.p = t.p;
        row.objective_closed_form = optimal_flow_time(instance);
        row.objective_oracle = oracle.objective;
        row.rel_gap =
            (row.objective_oracle - row.objective_closed_form) / row.objective_closed_form;
        row.order_is_sjf = oracle.order_is_sjf;
        rows[i] = row;
    });
    return rows;
}

void write_oracle_csv(std::ostream& out, std::span<const OracleRow> rows) {
    out << "seed,M,p,objective_closed_form,objective_oracle,rel_gap,order_is_sjf\n";
    for (const OracleRow& r : rows)
        out << r.seed << ',' << r.m << ',' << format17(r.p) << ','
            << format17(r.objective_closed_form) << ',' << format17(r.objective_oracle) << ','
            << format17(r.rel_gap) << ',' << (r.order_is_sjf ? 1 : 0) << '\n';
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HESRPT_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace hesrpt
