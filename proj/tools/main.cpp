#include "hesrpt/core.hpp"
#include "hesrpt/experiment.hpp"
#include "hesrpt/optimal.hpp"
#include "hesrpt/oracle.hpp"
#include "hesrpt/policies.hpp"
#include "hesrpt/simulator.hpp"
#include "hesrpt/workload.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using namespace hesrpt;

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitInfeasible = 4;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t at = s.find(sep, start);
        parts.push_back(s.substr(start, at == std::string::npos ? at : at - start));
        if (at == std::string::npos) break;
        start = at + 1;
    }
    return parts;
}

double parse_num(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing text");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse " + what + " from '" + s + "'");
    }
}

SizeDist parse_dist(const std::string& s) {
    std::vector<std::string> parts = split(s, ':');
    const std::string& head = parts.front();
    if (head == "pareto" && (parts.size() == 2 || parts.size() == 3)) {
        double shape = parse_num(parts[1], "Pareto shape");
        double scale = parts.size() == 3 ? parse_num(parts[2], "Pareto scale") : 1.0;
        return SizeDist::pareto(shape, scale);
    }
    if (head == "uniform" && parts.size() == 3)
        return SizeDist::uniform(parse_num(parts[1], "lower bound"),
                                 parse_num(parts[2], "upper bound"));
    if ((head == "fixed" || head == "det") && parts.size() == 2)
        return SizeDist::deterministic(parse_num(parts[1], "size"));
    throw std::invalid_argument("unknown size distribution '" + s +
                                "' (expected pareto:alpha[:scale], uniform:lo:hi, fixed:size)");
}

ArrivalProcess parse_arrivals(const std::string& s) {
    std::vector<std::string> parts = split(s, ':');
    if (parts.front() == "batch" && parts.size() == 1) return ArrivalProcess::batch();
    if (parts.front() == "poisson" && parts.size() == 2)
        return ArrivalProcess::poisson(parse_num(parts[1], "arrival rate"));
    if (parts.front() == "load" && parts.size() == 2)
        return ArrivalProcess::target_load(parse_num(parts[1], "target load"));
    throw std::invalid_argument("unknown arrival process '" + s +
                                "' (expected batch, poisson:lambda, load:rho)");
}

WeightKind parse_objective(const std::string& s) {
    if (s == "slowdown") return WeightKind::Slowdown;
    if (s == "flowtime") return WeightKind::FlowTime;
    throw std::invalid_argument("unknown objective '" + s + "' (expected slowdown|flowtime)");
}

KneeGrid parse_knee_grid(const std::string& s) {
    std::vector<std::string> parts = split(s, ':');
    if (parts.size() != 3)
        throw std::invalid_argument("knee grid must be lo:hi:count, e.g. 1e-6:1e2:30");
    KneeGrid grid;
    grid.lo_rel = parse_num(parts[0], "knee grid lower bound");
    grid.hi_rel = parse_num(parts[1], "knee grid upper bound");
    grid.count = static_cast<int>(parse_num(parts[2], "knee grid size"));
    return grid;
}

struct InstanceSource {
    std::string instance_path;
    int jobs = 0;
    std::string dist = "pareto:1.5";
    std::string arrivals = "batch";
    std::uint64_t seed = 1;

    std::vector<Job> load(const SpeedupParams& params) const {
        if (!instance_path.empty()) return read_instance_csv(instance_path);
        if (jobs <= 0)
            throw std::invalid_argument("give --instance FILE or a positive --jobs count");
        WorkloadSpec spec{jobs, parse_dist(dist), parse_arrivals(arrivals), seed};
        return generate(spec, params);
    }
};

void add_source_options(CLI::App* cmd, InstanceSource& src) {
    cmd->add_option("--instance", src.instance_path, "read the instance from this CSV file");
    cmd->add_option("--jobs", src.jobs, "generate this many jobs instead of reading a file");
    cmd->add_option("--dist", src.dist, "size distribution (pareto:alpha[:scale], uniform:lo:hi, fixed:size)")
        ->capture_default_str();
    cmd->add_option("--arrivals", src.arrivals, "arrival process (batch, poisson:lambda, load:rho)")
        ->capture_default_str();
    cmd->add_option("--seed", src.seed, "generator seed")->capture_default_str();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

Instance build_instance(std::vector<Job> jobs, const SpeedupParams& params, WeightKind objective) {
    WeightScheme weights = objective == WeightKind::Slowdown
                               ? WeightScheme::slowdown(jobs, params)
                               : WeightScheme::flow_time(jobs);
    return Instance(std::move(jobs), params, weights);
}

int cmd_allocate(const InstanceSource& src, double p, double servers,
                 const std::string& objective) {
    SpeedupParams params(p, servers);
    Instance inst = build_instance(src.load(params), params, parse_objective(objective));
    AllocationVector theta = optimal_allocation(inst, inst.job_count());
    ScaleFreeConstants omegas = optimal_omegas(inst);
    std::printf("%-6s %-8s %-24s %-24s %-24s %-24s\n", "rank", "job_id", "size", "weight",
                "omega", "theta");
    for (std::size_t k = 1; k <= inst.job_count(); ++k) {
        const Job& j = inst.jobs()[k - 1];
        std::printf("%-6zu %-8d %-24.17g %-24.17g %-24.17g %-24.17g\n", k, j.id, j.size,
                    inst.weight_of_rank(k), omegas.omegas[k - 1], theta.fraction_of(j.id));
    }
    bool batch = true;
    for (const Job& j : inst.jobs()) batch = batch && j.arrival_time == 0.0;
    if (batch) std::printf("optimal weighted flow time F* = %.17g\n", optimal_flow_time(inst));
    return 0;
}

int cmd_schedule(const InstanceSource& src, double p, double servers,
                 const std::string& objective, const std::string& out_dir) {
    SpeedupParams params(p, servers);
    Instance inst = build_instance(src.load(params), params, parse_objective(objective));
    OfflineSchedule sched = offline_schedule(inst);
    std::printf("%zu phases, %zu jobs, weighted flow time %.17g\n", sched.phases.size(),
                inst.job_count(), sched.objective);
    for (std::size_t i = 0; i < sched.phases.size(); ++i) {
        const SchedulePhase& ph = sched.phases[i];
        std::printf("phase %zu [%.12g, %.12g):", i, ph.start, ph.end);
        for (const auto& [id, f] : ph.alloc.entries()) std::printf(" %d:%.12g", id, f);
        std::printf("\n");
    }
    std::printf("completions:");
    for (const auto& [id, t] : sched.completions) std::printf(" %d:%.12g", id, t);
    std::printf("\n");
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out = open_out(fs::path(out_dir) / "schedule.csv");
        out << "phase,start,end,job_id,theta\n";
        char buf[128];
        for (std::size_t i = 0; i < sched.phases.size(); ++i)
            for (const auto& [id, f] : sched.phases[i].alloc.entries()) {
                std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d,%.17g\n", i,
                              sched.phases[i].start, sched.phases[i].end, id, f);
                out << buf;
            }
    }
    return 0;
}

int cmd_simulate(const InstanceSource& src, double p, double servers,
                 const std::string& objective, const std::string& policy_name, int quanta,
                 double knee_alpha, bool trace, const std::string& out_dir) {
    SpeedupParams params(p, servers);
    std::vector<Job> jobs = src.load(params);
    WeightKind kind = parse_objective(objective);
    WeightScheme weights = kind == WeightKind::Slowdown ? WeightScheme::slowdown(jobs, params)
                                                        : WeightScheme::flow_time(jobs);
    SimOptions opts;
    opts.quanta = quanta;
    opts.knee_alpha = knee_alpha;
    opts.record_trace = trace;
    auto policy = make_policy(policy_name);
    SimResult result = simulate(jobs, *policy, params, weights, opts);
    if (out_dir.empty()) {
        write_result_csv(std::cout, result);
    } else {
        fs::create_directories(out_dir);
        std::ofstream out = open_out(fs::path(out_dir) / "result.csv");
        write_result_csv(out, result);
        if (trace) {
            std::ofstream tout = open_out(fs::path(out_dir) / "trace.csv");
            write_trace_csv(tout, result, jobs);
        }
        std::printf("%s on %zu jobs: mean slowdown %.12g, mean flow time %.12g, "
                    "weighted flow time %.12g\n",
                    policy_name.c_str(), jobs.size(), result.mean_slowdown,
                    result.mean_flow_time, result.total_weighted_flow_time);
    }
    return 0;
}

struct CompareFlags {
    std::vector<double> p_grid;
    double servers = 0.0;
    int jobs = 0;
    std::string dist;
    std::string objective = "slowdown";
    std::uint64_t seed = 1;
    int reps = 0;
    int quanta = 1000;
    std::string knee_grid = "1e-6:1e2:30";
    std::vector<std::string> policies;
    std::vector<std::string> arrivals;  // online: load:rho per entry
    int measured = 0;
    std::string out_dir;
    bool desk = false;
};

void add_compare_options(CLI::App* cmd, CompareFlags& f, bool online) {
    cmd->add_option("--p", f.p_grid, "speedup exponents to sweep")->delimiter(',');
    cmd->add_option("--servers", f.servers, "server count N");
    cmd->add_option("--jobs", f.jobs,
                    online ? "arrivals per replication" : "batch size per replication");
    cmd->add_option("--dist", f.dist, "size distribution");
    cmd->add_option("--objective", f.objective, "slowdown|flowtime")->capture_default_str();
    cmd->add_option("--seed", f.seed, "base seed; replication r uses seed+r")
        ->capture_default_str();
    cmd->add_option("--reps", f.reps, "replications per cell");
    cmd->add_option("--quanta,--quanta.G", f.quanta, "discrete-policy quantum count G")
        ->capture_default_str();
    cmd->add_option("--knee-grid", f.knee_grid, "knee threshold grid lo:hi:count")
        ->capture_default_str();
    cmd->add_option("--policy", f.policies, "subset of policies to run")->delimiter(',');
    if (online) {
        cmd->add_option("--arrivals", f.arrivals, "target loads, e.g. load:0.4,load:0.8")
            ->delimiter(',');
        cmd->add_option("--measured", f.measured,
                        "jobs counted after warm-up (0: all post-warm-up)");
    }
    cmd->add_option("--out", f.out_dir, "directory for CSV and SVG output");
    cmd->add_flag("--desk", f.desk, "desk-scale preset for fast runs");
}

ExperimentConfig to_config(const CompareFlags& f, bool online) {
    ExperimentConfig cfg = online ? ExperimentConfig::online_defaults()
                                  : ExperimentConfig::offline_defaults();
    if (f.desk) {
        if (online) {
            cfg.m_jobs = 2500;
            cfg.measured_jobs = 2000;
        } else {
            cfg.m_jobs = 100;
        }
    }
    if (!f.p_grid.empty()) cfg.p_grid = f.p_grid;
    if (f.servers > 0.0) cfg.n_servers = f.servers;
    if (f.jobs > 0) cfg.m_jobs = f.jobs;
    if (!f.dist.empty()) cfg.size_dist = parse_dist(f.dist);
    cfg.objective = parse_objective(f.objective);
    cfg.seed = f.seed;
    if (f.reps > 0) cfg.replications = f.reps;
    cfg.quanta = f.quanta;
    cfg.knee_grid = parse_knee_grid(f.knee_grid);
    cfg.policies = f.policies;
    if (f.measured > 0) cfg.measured_jobs = f.measured;
    cfg.out_dir = f.out_dir;
    if (online && !f.arrivals.empty()) {
        cfg.load_grid.clear();
        for (const std::string& s : f.arrivals) {
            ArrivalProcess proc = parse_arrivals(s);
            if (proc.kind != ArrivalProcess::Kind::TargetLoad)
                throw std::invalid_argument(
                    "online comparisons sweep target loads; use --arrivals load:rho");
            cfg.load_grid.push_back(proc.value);
        }
    }
    return cfg;
}

int cmd_compare(const CompareFlags& flags, bool online) {
    ExperimentConfig cfg = to_config(flags, online);
    CompareReport report = online ? compare_online(cfg) : compare_offline(cfg);
    if (cfg.out_dir.empty()) {
        write_report_csv(std::cout, report, online, cfg);
    } else {
        std::printf("%zu result rows under %s\n", report.rows.size(), cfg.out_dir.c_str());
    }
    return 0;
}

struct OracleFlags {
    std::vector<int> m_values{2, 3};
    std::vector<double> p_grid{0.3, 0.5, 0.9};
    std::string objective = "slowdown";
    int reps = 20;
    double servers = 100.0;
    std::string dist = "uniform:0.5:2";
    std::uint64_t seed = 1;
    std::string out_dir;
};

int cmd_oracle(const OracleFlags& f) {
    OracleSweepConfig cfg;
    cfg.m_values = f.m_values;
    cfg.p_grid = f.p_grid;
    cfg.objective = parse_objective(f.objective);
    cfg.instances_per_cell = f.reps;
    cfg.n_servers = f.servers;
    cfg.size_dist = parse_dist(f.dist);
    cfg.seed = f.seed;
    std::vector<OracleRow> rows = oracle_comparison(cfg);
    if (f.out_dir.empty()) {
        write_oracle_csv(std::cout, rows);
    } else {
        fs::create_directories(f.out_dir);
        std::ofstream out = open_out(fs::path(f.out_dir) / "oracle.csv");
        write_oracle_csv(out, rows);
        std::printf("%zu oracle rows under %s\n", rows.size(), f.out_dir.c_str());
    }
    return 0;
}

int cmd_gen(const InstanceSource& src, double p, double servers, const std::string& out_dir) {
    SpeedupParams params(p, servers);
    if (src.jobs <= 0) throw std::invalid_argument("--jobs must be positive");
    WorkloadSpec spec{src.jobs, parse_dist(src.dist), parse_arrivals(src.arrivals), src.seed};
    std::vector<Job> jobs = generate(spec, params);
    if (out_dir.empty()) {
        write_instance_csv(std::cout, jobs);
    } else {
        fs::create_directories(out_dir);
        write_instance_csv((fs::path(out_dir) / "instance.csv").string(), jobs);
        std::printf("wrote %zu jobs to %s/instance.csv\n", jobs.size(), out_dir.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal server allocation for parallelizable jobs: closed forms, "
                 "simulation, and experiment sweeps"};
    app.require_subcommand(1);

    InstanceSource alloc_src, sched_src, sim_src, gen_src;
    double alloc_p = 0.5, sched_p = 0.5, sim_p = 0.5, gen_p = 0.5;
    double alloc_n = 1e6, sched_n = 1e6, sim_n = 1e6, gen_n = 1e6;
    std::string alloc_obj = "slowdown", sched_obj = "slowdown", sim_obj = "slowdown";
    std::string sched_out, sim_out, gen_out;
    std::string sim_policy;
    int sim_quanta = 1000;
    double sim_knee_alpha = 1.0;
    bool sim_trace = false;
    CompareFlags offline_flags, online_flags;
    OracleFlags oracle_flags;

    CLI::App* allocate = app.add_subcommand("allocate", "closed-form allocations and constants");
    add_source_options(allocate, alloc_src);
    allocate->add_option("--p", alloc_p, "speedup exponent")->capture_default_str();
    allocate->add_option("--servers", alloc_n, "server count N")->capture_default_str();
    allocate->add_option("--objective", alloc_obj, "slowdown|flowtime")->capture_default_str();

    CLI::App* schedule = app.add_subcommand("schedule", "full optimal batch schedule");
    add_source_options(schedule, sched_src);
    schedule->add_option("--p", sched_p, "speedup exponent")->capture_default_str();
    schedule->add_option("--servers", sched_n, "server count N")->capture_default_str();
    schedule->add_option("--objective", sched_obj, "slowdown|flowtime")->capture_default_str();
    schedule->add_option("--out", sched_out, "directory for schedule.csv");

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "run one policy on one instance");
    add_source_options(simulate_cmd, sim_src);
    simulate_cmd->add_option("--p", sim_p, "speedup exponent")->capture_default_str();
    simulate_cmd->add_option("--servers", sim_n, "server count N")->capture_default_str();
    simulate_cmd->add_option("--objective", sim_obj, "slowdown|flowtime")->capture_default_str();
    simulate_cmd->add_option("--policy", sim_policy, "hesrpt|srpt|equi|hell|knee|rs")
        ->required()
        ->check(CLI::IsMember({"hesrpt", "srpt", "equi", "hell", "knee", "rs"}));
    simulate_cmd->add_option("--quanta,--quanta.G", sim_quanta, "discrete-policy quantum count")
        ->capture_default_str();
    simulate_cmd->add_option("--knee.alpha", sim_knee_alpha, "knee threshold")
        ->capture_default_str();
    auto* trace_flag = simulate_cmd->add_flag("--trace", sim_trace, "also write trace.csv");
    auto* sim_out_opt =
        simulate_cmd->add_option("--out", sim_out, "directory for result.csv and trace.csv");
    trace_flag->needs(sim_out_opt);
    simulate_cmd->set_config("--config");

    CLI::App* offline = app.add_subcommand("compare-offline", "batch policy comparison sweep");
    add_compare_options(offline, offline_flags, false);

    CLI::App* online = app.add_subcommand("compare-online", "Poisson-arrival comparison sweep");
    add_compare_options(online, online_flags, true);

    CLI::App* oracle = app.add_subcommand("oracle", "exhaustive-search optimality cross-check");
    oracle->add_option("--m", oracle_flags.m_values, "job counts (max 4)")->delimiter(',');
    oracle->add_option("--p", oracle_flags.p_grid, "speedup exponents")->delimiter(',');
    oracle->add_option("--objective", oracle_flags.objective, "slowdown|flowtime")
        ->capture_default_str();
    oracle->add_option("--reps", oracle_flags.reps, "instances per cell")->capture_default_str();
    oracle->add_option("--servers", oracle_flags.servers, "server count N")
        ->capture_default_str();
    oracle->add_option("--dist", oracle_flags.dist, "size distribution")->capture_default_str();
    oracle->add_option("--seed", oracle_flags.seed, "base seed")->capture_default_str();
    oracle->add_option("--out", oracle_flags.out_dir, "directory for oracle.csv");

    CLI::App* gen = app.add_subcommand("gen", "generate a seeded instance CSV");
    add_source_options(gen, gen_src);
    gen->get_option("--instance")->group("");  // gen only synthesizes
    gen->add_option("--p", gen_p, "speedup exponent (used by load: arrivals)")
        ->capture_default_str();
    gen->add_option("--servers", gen_n, "server count N (used by load: arrivals)")
        ->capture_default_str();
    gen->add_option("--out", gen_out, "directory for instance.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(allocate)) return cmd_allocate(alloc_src, alloc_p, alloc_n, alloc_obj);
        if (app.got_subcommand(schedule))
            return cmd_schedule(sched_src, sched_p, sched_n, sched_obj, sched_out);
        if (app.got_subcommand(simulate_cmd))
            return cmd_simulate(sim_src, sim_p, sim_n, sim_obj, sim_policy, sim_quanta,
                                sim_knee_alpha, sim_trace, sim_out);
        if (app.got_subcommand(offline)) return cmd_compare(offline_flags, false);
        if (app.got_subcommand(online)) return cmd_compare(online_flags, true);
        if (app.got_subcommand(oracle)) return cmd_oracle(oracle_flags);
        if (app.got_subcommand(gen)) return cmd_gen(gen_src, gen_p, gen_n, gen_out);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const Refusal& e) {
        std::fprintf(stderr, "refused: %s\n", e.what());
        return kExitInfeasible;
    } catch (const SimulationError& e) {
        std::fprintf(stderr, "simulation failed: %s\n", e.what());
        return kExitInfeasible;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "infeasible request: %s\n", e.what());
        return kExitInfeasible;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
    return 0;
}
