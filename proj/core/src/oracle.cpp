#include "hesrpt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hesrpt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOrderSlack = 1e-12;  // simultaneous finishes count as in-order

struct OrderContext {
    std::vector<int> order;       // job ids, first completion first
    std::vector<double> sizes;    // aligned to order
    std::vector<double> weights;  // aligned to order
    double p = 0.0;
    double rate_full = 0.0;
};

OrderContext make_context(const Instance& inst, const std::vector<int>& order) {
    OrderContext ctx;
    ctx.order = order;
    ctx.p = inst.speedup().p();
    ctx.rate_full = inst.speedup().rate_full();
    ctx.sizes.reserve(order.size());
    ctx.weights.reserve(order.size());
    for (int id : order) {
        auto it = std::find_if(inst.jobs().begin(), inst.jobs().end(),
                               [&](const Job& j) { return j.id == id; });
        ctx.sizes.push_back(it->size);
        ctx.weights.push_back(inst.weights().weight_of(id));
    }
    return ctx;
}

/// theta[k][j] = fraction for order[k+j] during phase k.  Returns the
/// weighted flow time, or nullopt when the completion order is violated.
std::optional<double> run_phases(const OrderContext& ctx,
                                 const std::vector<std::vector<double>>& theta) {
    const std::size_t M = ctx.order.size();
    std::vector<double> rem = ctx.sizes;
    double t = 0.0, objective = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
        const std::vector<double>& row = theta[k];
        if (!(row[0] > 0.0)) return std::nullopt;  // the finisher needs servers
        double finisher_rate = std::pow(row[0], ctx.p) * ctx.rate_full;
        double dt = rem[k] / finisher_rate;
        for (std::size_t j = 1; j < row.size(); ++j) {
            double f = row[j];
            if (f <= 0.0) continue;
            double rate = std::pow(f, ctx.p) * ctx.rate_full;
            if (rem[k + j] < dt * rate * (1.0 - kOrderSlack))
                return std::nullopt;  // a later job would finish first
            rem[k + j] = std::max(0.0, rem[k + j] - dt * rate);
        }
        t += dt;
        objective += ctx.weights[k] * t;
    }
    return objective;
}

/// Free variables are the fractions of the non-finishing jobs, phase-major:
/// phase k contributes M-k-1 of them; the finisher takes the remainder.
struct FlatLayout {
    std::vector<std::size_t> phase_of;   // var -> phase
    std::vector<std::size_t> first_var;  // phase -> first var index
    std::size_t total = 0;
};

FlatLayout make_layout(std::size_t M) {
    FlatLayout lay;
    lay.first_var.resize(M);
    for (std::size_t k = 0; k < M; ++k) {
        lay.first_var[k] = lay.total;
        for (std::size_t j = 1; j < M - k; ++j) {
            lay.phase_of.push_back(k);
            ++lay.total;
        }
    }
    return lay;
}

std::vector<std::vector<double>> unflatten(std::size_t M, const std::vector<double>& flat) {
    std::vector<std::vector<double>> theta(M);
    std::size_t v = 0;
    for (std::size_t k = 0; k < M; ++k) {
        theta[k].resize(M - k);
        double used = 0.0;
        for (std::size_t j = 1; j < M - k; ++j) {
            theta[k][j] = flat[v++];
            used += theta[k][j];
        }
        theta[k][0] = 1.0 - used;
    }
    return theta;
}

double eval_flat(const OrderContext& ctx, const std::vector<double>& flat) {
    std::vector<std::vector<double>> theta = unflatten(ctx.order.size(), flat);
    for (const auto& row : theta)
        if (row[0] < 0.0) return kInf;
    auto obj = run_phases(ctx, theta);
    return obj ? *obj : kInf;
}

/// Simplex lattice size: grid points with d coordinates in {0..R} summing
/// to at most R, i.e. C(R+d, d).
double simplex_points(std::size_t R, std::size_t d) {
    double n = 1.0;
    for (std::size_t i = 1; i <= d; ++i) n *= static_cast<double>(R + i) / i;
    return n;
}

std::size_t pick_grid_steps(std::size_t M, const OracleOptions& opts) {
    auto grid_size = [&](std::size_t R) {
        double total = 1.0;
        for (std::size_t k = 0; k < M; ++k) total *= simplex_points(R, M - k - 1);
        return total;
    };
    std::size_t R = static_cast<std::size_t>(std::lround(1.0 / opts.resolution));
    if (R < 1) R = 1;
    while (R > 1 && grid_size(R) > static_cast<double>(opts.eval_budget)) --R;
    return R;
}

struct BestPoint {
    double objective = kInf;
    std::vector<double> flat;
};

void grid_search(const OrderContext& ctx, const FlatLayout& lay, std::size_t R,
                 std::vector<double>& flat, std::size_t v, double phase_budget,
                 BestPoint& best) {
    if (v == lay.total) {
        double obj = eval_flat(ctx, flat);
        if (obj < best.objective) {
            best.objective = obj;
            best.flat = flat;
        }
        return;
    }
    std::size_t phase = lay.phase_of[v];
    bool last_in_phase = v + 1 == lay.total || lay.phase_of[v + 1] != phase;
    double budget = (v > 0 && lay.phase_of[v - 1] == phase) ? phase_budget : 1.0;
    auto steps = static_cast<std::size_t>(std::floor(budget * R + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) {
        flat[v] = static_cast<double>(i) / R;
        grid_search(ctx, lay, R, flat, v + 1, last_in_phase ? 1.0 : budget - flat[v], best);
    }
}

double golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                       double f_best_hint, double tol) {
    // robust against infinite plateaus: coarse scan, then golden section
    constexpr int kScan = 24;
    double best_x = lo, best_f = kInf;
    for (int i = 0; i <= kScan; ++i) {
        double x = lo + (hi - lo) * i / kScan;
        double fx = f(x);
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
        }
    }
    if (best_f == kInf) return f_best_hint;  // nothing feasible on this line
    double cell = (hi - lo) / kScan;
    double a = std::max(lo, best_x - cell), b = std::min(hi, best_x + cell);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    double mid = (a + b) / 2;
    return f(mid) <= best_f ? mid : best_x;
}

void coordinate_descent(const OrderContext& ctx, const FlatLayout& lay,
                        const OracleOptions& opts, BestPoint& best) {
    if (lay.total == 0 || best.flat.empty()) return;
    std::vector<double> flat = best.flat;
    for (int sweep = 0; sweep < 200; ++sweep) {
        double max_move = 0.0;
        for (std::size_t v = 0; v < lay.total; ++v) {
            std::size_t phase = lay.phase_of[v];
            double others = 0.0;
            for (std::size_t u = 0; u < lay.total; ++u)
                if (u != v && lay.phase_of[u] == phase) others += flat[u];
            double hi = std::max(0.0, 1.0 - others);
            double cur = std::min(flat[v], hi);
            std::function<double(double)> line = [&](double x) {
                double saved = flat[v];
                flat[v] = x;
                double obj = eval_flat(ctx, flat);
                flat[v] = saved;
                return obj;
            };
            double next = golden_minimize(line, 0.0, hi, cur, opts.refine_tol / 4);
            if (line(next) < line(cur) || next == cur) {
                max_move = std::max(max_move, std::abs(next - cur));
                flat[v] = next;
            } else {
                flat[v] = cur;
            }
        }
        double obj = eval_flat(ctx, flat);
        if (obj < best.objective) {
            best.objective = obj;
            best.flat = flat;
        }
        if (max_move < opts.refine_tol) break;
    }
}

std::vector<int> sjf_order(const Instance& inst) {
    std::vector<int> ids;  // canonical order is largest first; SJF is its mirror
    ids.reserve(inst.job_count());
    for (auto it = inst.jobs().rbegin(); it != inst.jobs().rend(); ++it) ids.push_back(it->id);
    return ids;
}

}  // namespace

std::optional<double> evaluate_order(const Instance& instance, const OrderedProblem& candidate) {
    const std::size_t M = instance.job_count();
    for (const Job& j : instance.jobs())
        if (j.arrival_time != 0.0)
            throw std::domain_error("ordered evaluation requires all arrivals at time zero");
    if (candidate.order.size() != M || candidate.theta.size() != M)
        throw std::domain_error("candidate shape does not match the instance");
    std::vector<int> sorted_ids = candidate.order;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    std::vector<int> instance_ids;
    for (const Job& j : instance.jobs()) instance_ids.push_back(j.id);
    std::sort(instance_ids.begin(), instance_ids.end());
    if (sorted_ids != instance_ids)
        throw std::domain_error("candidate order is not a permutation of the instance's jobs");
    for (std::size_t k = 0; k < M; ++k) {
        const auto& row = candidate.theta[k];
        if (row.size() != M - k) throw std::domain_error("phase row has the wrong width");
        double sum = 0.0;
        for (double f : row) {
            if (!(f >= 0.0) || !(f <= 1.0))
                throw std::domain_error("allocation fraction outside [0, 1]");
            sum += f;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::domain_error("phase allocations must sum to 1");
    }
    return run_phases(make_context(instance, candidate.order), candidate.theta);
}

OracleResult brute_force_optimum(const Instance& instance, const OracleOptions& options) {
    const std::size_t M = instance.job_count();
    if (M == 0) throw std::domain_error("empty instance");
    if (M > options.max_jobs)
        throw Refusal("exhaustive search supports at most " + std::to_string(options.max_jobs) +
                      " jobs; got " + std::to_string(M));
    for (const Job& j : instance.jobs())
        if (j.arrival_time != 0.0)
            throw std::domain_error("exhaustive search requires all arrivals at time zero");

    const std::vector<int> sjf = sjf_order(instance);
    std::vector<std::vector<int>> orders;
    if (options.sjf_only) {
        orders.push_back(sjf);
    } else {
        orders.push_back(sjf);  // evaluated first so objective ties keep SJF
        std::vector<std::size_t> idx(M);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        do {
            std::vector<int> order;
            order.reserve(M);
            for (std::size_t i : idx) order.push_back(instance.jobs()[i].id);
            if (order != sjf) orders.push_back(std::move(order));
        } while (std::next_permutation(idx.begin(), idx.end()));
    }

    const FlatLayout lay = make_layout(M);
    const std::size_t R = pick_grid_steps(M, options);

    OracleResult result;
    double global_best = kInf;
    for (const std::vector<int>& order : orders) {
        OrderContext ctx = make_context(instance, order);
        BestPoint best;
        std::vector<double> flat(lay.total, 0.0);
        grid_search(ctx, lay, R, flat, 0, 1.0, best);
        if (best.objective == kInf) {
            // always-feasible fallback: each phase serves only its finisher
            best.flat.assign(lay.total, 0.0);
            best.objective = eval_flat(ctx, best.flat);
        }
        coordinate_descent(ctx, lay, options, best);
        if (best.objective < global_best) {
            global_best = best.objective;
            result.best.order = order;
            result.best.theta = unflatten(M, best.flat);
            result.objective = best.objective;
        }
    }
    result.order_is_sjf = result.best.order == sjf;
    return result;
}

double scale_free_deviation(const OrderedProblem& candidate) {
    const std::size_t M = candidate.order.size();
    double worst = 0.0;
    for (std::size_t q = 0; q < M; ++q) {
        double first = -1.0;
        for (std::size_t k = 0; k <= q; ++k) {
            double own = candidate.theta[k][q - k];
            double later = 0.0;
            for (std::size_t r = q + 1; r < M; ++r) later += candidate.theta[k][r - k];
            double denom = own + later;
            if (denom <= 0.0) continue;
            double ratio = own / denom;
            if (first < 0.0)
                first = ratio;
            else
                worst = std::max(worst, std::abs(ratio - first));
        }
    }
    return worst;
}

}  // namespace hesrpt
