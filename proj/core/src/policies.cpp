#include "hesrpt/policies.hpp"

#include "hesrpt/optimal.hpp"
#include "hesrpt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hesrpt {

namespace {

void require_active(const PolicyState& state) {
    if (state.active.empty()) throw std::invalid_argument("no active jobs");
    for (const ActiveJob& j : state.active)
        if (!(j.remaining > 0.0)) throw std::invalid_argument("active job with no remaining work");
}

AllocationVector whole_machine_to(int job_id) {
    return AllocationVector({{job_id, 1.0}});
}

int require_quanta(const PolicyState& state) {
    if (state.quanta < 1) throw std::invalid_argument("quantum count G must be >= 1");
    return state.quanta;
}

}  // namespace

AllocationVector srpt_decide(const PolicyState& state) {
    require_active(state);
    const ActiveJob* best = &state.active.front();
    for (const ActiveJob& j : state.active)
        if (j.remaining < best->remaining || (j.remaining == best->remaining && j.id < best->id))
            best = &j;
    return whole_machine_to(best->id);
}

AllocationVector equi_decide(const PolicyState& state) {
    require_active(state);
    const double share = 1.0 / static_cast<double>(state.active.size());
    std::vector<std::pair<int, double>> entries;
    entries.reserve(state.active.size());
    for (const ActiveJob& j : state.active) entries.emplace_back(j.id, share);
    return AllocationVector(std::move(entries));
}

AllocationVector hell_decide(const PolicyState& state) {
    require_active(state);
    const int G = require_quanta(state);
    const std::size_t m = state.active.size();
    const double exponent = 2.0 * state.speedup.p() - 1.0;
    const double quantum = state.speedup.n_servers() / G;
    // score(i, k) = c^(2p-1) / remaining_i with c = (g_i + k) * N / G; the
    // c-part only depends on the total quantum count, so tabulate it once.
    std::vector<double> cpow(static_cast<std::size_t>(G) + 1, 0.0);
    for (int j = 1; j <= G; ++j) cpow[j] = std::pow(j * quantum, exponent);

    std::vector<int> grant(m, 0);
    int left = G;
    while (left > 0) {
        // score is monotone in k, so per job only k = 1 and k = left can win;
        // ties prefer the lower job id, then the smaller batch
        std::size_t best_i = 0;
        int best_k = 0;
        double best_v = -std::numeric_limits<double>::infinity();
        auto consider = [&](std::size_t i, int k) {
            double v = cpow[grant[i] + k] / state.active[i].remaining;
            int id = state.active[i].id;
            if (v > best_v ||
                (v == best_v && (id < state.active[best_i].id ||
                                 (id == state.active[best_i].id && k < best_k)))) {
                best_i = i;
                best_k = k;
                best_v = v;
            }
        };
        for (std::size_t i = 0; i < m; ++i) {
            consider(i, 1);
            if (left > 1) consider(i, left);
        }
        grant[best_i] += best_k;
        left -= best_k;
    }

    std::vector<std::pair<int, double>> entries;
    for (std::size_t i = 0; i < m; ++i)
        if (grant[i] > 0)
            entries.emplace_back(state.active[i].id, grant[i] / static_cast<double>(G));
    return AllocationVector(std::move(entries));
}

AllocationVector knee_decide(const PolicyState& state) {
    require_active(state);
    const int G = require_quanta(state);
    if (!(state.knee_alpha > 0.0)) throw std::invalid_argument("knee threshold alpha must be > 0");
    const std::size_t m = state.active.size();
    const double quantum = state.speedup.n_servers() / G;
    const double p = state.speedup.p();

    auto inv_rate = [&](int k) { return std::pow(k * quantum, -p); };
    // gain(k) = rem * (s(kN/G)^-1 - s((k+1)N/G)^-1), strictly decreasing in k,
    // so the knee (first k with gain below alpha) admits a binary search.
    auto knee_of = [&](double rem) {
        auto gain = [&](int k) { return rem * (inv_rate(k) - inv_rate(k + 1)); };
        if (G == 1 || gain(1) < state.knee_alpha) return 1;
        if (gain(G - 1) >= state.knee_alpha) return G;
        int lo = 1, hi = G - 1;  // gain(lo) >= alpha, gain(hi) < alpha
        while (hi - lo > 1) {
            int mid = lo + (hi - lo) / 2;
            (gain(mid) >= state.knee_alpha ? lo : hi) = mid;
        }
        return hi;
    };

    std::vector<std::pair<int, std::size_t>> order(m);  // (knee, index)
    for (std::size_t i = 0; i < m; ++i) order[i] = {knee_of(state.active[i].remaining), i};
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return state.active[a.second].id < state.active[b.second].id;
    });

    std::vector<int> grant(m, 0);
    int left = G;
    for (const auto& [knee, i] : order) {
        if (left == 0) break;
        grant[i] = std::min(knee, left);
        left -= grant[i];
    }
    if (left > 0) {
        std::size_t smallest = 0;
        for (std::size_t i = 1; i < m; ++i) {
            const ActiveJob& a = state.active[i];
            const ActiveJob& b = state.active[smallest];
            if (a.remaining < b.remaining || (a.remaining == b.remaining && a.id < b.id))
                smallest = i;
        }
        grant[smallest] += left;
    }

    std::vector<std::pair<int, double>> entries;
    for (std::size_t i = 0; i < m; ++i)
        if (grant[i] > 0)
            entries.emplace_back(state.active[i].id, grant[i] / static_cast<double>(G));
    return AllocationVector(std::move(entries));
}

AllocationVector rs_decide(const PolicyState& state) {
    require_active(state);
    const ActiveJob* best = &state.active.front();
    double best_product = best->remaining * best->size;
    for (const ActiveJob& j : state.active) {
        double product = j.remaining * j.size;
        if (product < best_product || (product == best_product && j.id < best->id)) {
            best = &j;
            best_product = product;
        }
    }
    return whole_machine_to(best->id);
}

AllocationVector adaptive_hesrpt_decide(const PolicyState& state) {
    require_active(state);
    const std::size_t m = state.active.size();
    // Rank by descending remaining work (rank m = smallest), ties by id.
    std::vector<std::size_t> rank(m);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        const ActiveJob& ja = state.active[a];
        const ActiveJob& jb = state.active[b];
        if (ja.remaining != jb.remaining) return ja.remaining > jb.remaining;
        return ja.id < jb.id;
    });
    std::vector<double> weights(m);
    for (std::size_t i = 0; i < m; ++i) {
        const ActiveJob& j = state.active[rank[i]];
        weights[i] = state.objective == WeightKind::Slowdown
                         ? state.speedup.rate_full() / j.size
                         : 1.0;
    }
    std::vector<double> theta = allocation_fractions(weights, state.speedup.p());
    std::vector<std::pair<int, double>> entries;
    entries.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        entries.emplace_back(state.active[rank[i]].id, theta[i]);
    return AllocationVector(std::move(entries));
}

namespace {

template <AllocationVector (*Fn)(const PolicyState&)>
class NamedPolicy final : public Policy {
public:
    explicit NamedPolicy(std::string_view name) : name_(name) {}
    std::string_view name() const noexcept override { return name_; }
    AllocationVector decide(const PolicyState& state) const override { return Fn(state); }

private:
    std::string_view name_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(std::string_view name) {
    if (name == "hesrpt") return std::make_unique<NamedPolicy<adaptive_hesrpt_decide>>("hesrpt");
    if (name == "srpt") return std::make_unique<NamedPolicy<srpt_decide>>("srpt");
    if (name == "equi") return std::make_unique<NamedPolicy<equi_decide>>("equi");
    if (name == "hell") return std::make_unique<NamedPolicy<hell_decide>>("hell");
    if (name == "knee") return std::make_unique<NamedPolicy<knee_decide>>("knee");
    if (name == "rs") return std::make_unique<NamedPolicy<rs_decide>>("rs");
    throw std::invalid_argument("unknown policy name: " + std::string(name));
}

double knee_tune_alpha(const std::vector<std::vector<Job>>& batches,
                       const SpeedupParams& params, WeightKind objective,
                       int quanta, std::span<const double> alpha_grid) {
    if (alpha_grid.empty()) throw std::invalid_argument("alpha grid must be nonempty");
    if (batches.empty()) throw std::invalid_argument("need at least one job batch");
    auto policy = make_policy("knee");
    double best_alpha = alpha_grid.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (double alpha : alpha_grid) {
        SimOptions opts;
        opts.quanta = quanta;
        opts.knee_alpha = alpha;
        double score = 0.0;
        for (const auto& batch : batches) {
            WeightScheme weights = objective == WeightKind::Slowdown
                                       ? WeightScheme::slowdown(batch, params)
                                       : WeightScheme::flow_time(batch);
            SimResult r = simulate(batch, *policy, params, weights, opts);
            score += objective == WeightKind::Slowdown ? r.mean_slowdown : r.mean_flow_time;
        }
        if (score < best_score) {
            best_score = score;
            best_alpha = alpha;
        }
    }
    return best_alpha;
}

}  // namespace hesrpt
