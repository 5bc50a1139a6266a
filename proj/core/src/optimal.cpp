#include "hesrpt/optimal.hpp"

#include <algorithm>
#include <cmath>

namespace hesrpt {

namespace {

std::vector<double> weight_prefix(std::span<const double> weights) {
    std::vector<double> z(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
            throw std::domain_error("weights must be positive and finite");
        acc += weights[i];
        z[i] = acc;
    }
    return z;
}

std::vector<double> canonical_weights(const Instance& inst) {
    std::vector<double> w;
    w.reserve(inst.job_count());
    for (const Job& j : inst.jobs()) w.push_back(inst.weights().weight_of(j.id));
    return w;
}

void require_favoring(const Instance& inst) {
    if (!weights_favor_small_jobs(inst))
        throw std::domain_error(
            "closed form requires weights non-decreasing from largest to smallest job");
}

void require_batch(const Instance& inst) {
    for (const Job& j : inst.jobs())
        if (j.arrival_time != 0.0)
            throw std::domain_error("closed form requires all arrivals at time zero");
}

}  // namespace

std::vector<double> allocation_fractions(std::span<const double> weights, double p) {
    if (weights.empty()) throw std::domain_error("need at least one active job");
    if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("p must lie in (0, 1)");
    const double q = 1.0 / (1.0 - p);
    std::vector<double> z = weight_prefix(weights);
    const double log_zm = std::log(z.back());
    const std::size_t m = weights.size();
    std::vector<double> theta(m);
    // Cumulative fractions (z(i)/z(m))^q are computed in log space; each lies
    // in (0, 1], so nothing here can overflow even for extreme weights.
    double prev = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        double cur = std::exp(q * (std::log(z[i]) - log_zm));
        theta[i] = cur - prev;
        prev = cur;
    }
    theta[m - 1] = 1.0 - prev;
    return theta;
}

std::vector<double> scale_free_omegas(std::span<const double> weights, double p) {
    if (weights.empty()) throw std::domain_error("need at least one active job");
    if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("p must lie in (0, 1)");
    const double q = 1.0 / (1.0 - p);
    std::vector<double> z = weight_prefix(weights);
    std::vector<double> omegas(weights.size());
    omegas[0] = 0.0;
    for (std::size_t k = 1; k < weights.size(); ++k)
        omegas[k] = 1.0 / std::expm1(q * (std::log(z[k]) - std::log(z[k - 1])));
    return omegas;
}

ScaleFreeConstants optimal_omegas(const Instance& instance) {
    if (instance.job_count() == 0) throw std::domain_error("empty instance");
    require_favoring(instance);
    return ScaleFreeConstants{
        scale_free_omegas(canonical_weights(instance), instance.speedup().p())};
}

AllocationVector optimal_allocation(const Instance& instance, std::size_t active_count) {
    if (active_count < 1 || active_count > instance.job_count())
        throw std::domain_error("active count outside [1, job count]");
    require_favoring(instance);
    std::vector<double> w = canonical_weights(instance);
    w.resize(active_count);
    std::vector<double> theta = allocation_fractions(w, instance.speedup().p());
    std::vector<std::pair<int, double>> entries;
    entries.reserve(active_count);
    for (std::size_t i = 0; i < active_count; ++i)
        entries.emplace_back(instance.jobs()[i].id, theta[i]);
    return AllocationVector(std::move(entries));
}

double optimal_flow_time(const Instance& instance) {
    if (instance.job_count() == 0) throw std::domain_error("empty instance");
    require_favoring(instance);
    require_batch(instance);
    const double p = instance.speedup().p();
    const double q = 1.0 / (1.0 - p);
    double total = 0.0;
    // (z(k)^q - z(k-1)^q)^(1-p) = z(k) * (1 - (z(k-1)/z(k))^q)^(1-p); the
    // rewrite keeps everything bounded when z(k)^q alone would overflow.
    for (std::size_t k = 1; k <= instance.job_count(); ++k) {
        double zk = z_prefix(instance, k);
        double term;
        if (k == 1) {
            term = zk;
        } else {
            double ratio_q = std::exp(q * (std::log(z_prefix(instance, k - 1)) - std::log(zk)));
            term = zk * std::pow(1.0 - ratio_q, 1.0 - p);
        }
        total += instance.jobs()[k - 1].size * term;
    }
    return total / instance.speedup().rate_full();
}

OfflineSchedule offline_schedule(const Instance& instance) {
    if (instance.job_count() == 0) throw std::domain_error("empty instance");
    require_favoring(instance);
    require_batch(instance);
    const SpeedupParams& params = instance.speedup();
    const std::size_t M = instance.job_count();
    std::vector<double> w = canonical_weights(instance);
    std::vector<double> rem;
    double total_work = 0.0;
    rem.reserve(M);
    for (const Job& j : instance.jobs()) {
        rem.push_back(j.size);
        total_work += j.size;
    }
    const double merge_eps = 1e-15 * (total_work / params.rate_full());

    OfflineSchedule out;
    out.phases.reserve(M);
    out.completions.reserve(M);
    double t = 0.0;
    for (std::size_t m = M; m >= 1; --m) {
        std::vector<double> theta =
            allocation_fractions(std::span<const double>(w.data(), m), params.p());
        std::vector<double> rates(m);
        for (std::size_t i = 0; i < m; ++i) rates[i] = speedup(params, theta[i]);
        double dt = rem[m - 1] / rates[m - 1];
        if (dt > merge_eps) {
            std::vector<std::pair<int, double>> entries;
            entries.reserve(m);
            for (std::size_t i = 0; i < m; ++i)
                entries.emplace_back(instance.jobs()[i].id, theta[i]);
            out.phases.push_back({t, t + dt, AllocationVector(std::move(entries))});
        }
        for (std::size_t i = 0; i + 1 < m; ++i)
            rem[i] = std::max(0.0, rem[i] - dt * rates[i]);
        rem[m - 1] = 0.0;
        t += dt;
        out.completions.emplace_back(instance.jobs()[m - 1].id, t);
    }
    std::sort(out.completions.begin(), out.completions.end());
    double objective = 0.0;
    for (const auto& [id, ct] : out.completions)
        objective += instance.weights().weight_of(id) * ct;
    out.objective = objective;
    return out;
}

}  // namespace hesrpt
