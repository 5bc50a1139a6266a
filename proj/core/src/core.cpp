#include "hesrpt/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace hesrpt {

SpeedupParams::SpeedupParams(double p, double n_servers, ExponentBounds bounds)
    : p_(p), n_(n_servers) {
    if (!(bounds.min > 0.0) || !(bounds.max < 1.0) || !(bounds.min <= bounds.max))
        throw std::invalid_argument("exponent bounds must satisfy 0 < min <= max < 1");
    if (!(p >= bounds.min) || !(p <= bounds.max))
        throw std::domain_error("speedup exponent p outside accepted range");
    if (!(n_servers > 0.0) || !std::isfinite(n_servers))
        throw std::domain_error("server count must be positive and finite");
    rate_full_ = std::pow(n_, p_);
}

double speedup(const SpeedupParams& params, double fraction) {
    if (!(fraction >= 0.0) || !(fraction <= 1.0))
        throw std::domain_error("server fraction outside [0, 1]");
    if (fraction == 0.0) return 0.0;
    return std::pow(fraction, params.p()) * params.rate_full();
}

Job make_job(int id, double size, double arrival_time) {
    if (!(size > 0.0) || !std::isfinite(size))
        throw std::invalid_argument("job size must be positive and finite");
    if (!(arrival_time >= 0.0) || !std::isfinite(arrival_time))
        throw std::invalid_argument("arrival time must be nonnegative and finite");
    return Job{id, size, arrival_time, size};
}

WeightScheme::WeightScheme(WeightKind kind, std::vector<std::pair<int, double>> weights)
    : kind_(kind), weights_(std::move(weights)) {
    std::sort(weights_.begin(), weights_.end());
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (i > 0 && weights_[i].first == weights_[i - 1].first)
            throw std::invalid_argument("duplicate job id in weight scheme");
        if (!(weights_[i].second > 0.0) || !std::isfinite(weights_[i].second))
            throw std::invalid_argument("weights must be positive and finite");
    }
}

WeightScheme WeightScheme::flow_time(std::span<const Job> jobs) {
    std::vector<std::pair<int, double>> w;
    w.reserve(jobs.size());
    for (const Job& j : jobs) w.emplace_back(j.id, 1.0);
    return WeightScheme(WeightKind::FlowTime, std::move(w));
}

WeightScheme WeightScheme::slowdown(std::span<const Job> jobs, const SpeedupParams& params) {
    std::vector<std::pair<int, double>> w;
    w.reserve(jobs.size());
    for (const Job& j : jobs) {
        if (!(j.size > 0.0)) throw std::invalid_argument("job size must be positive");
        w.emplace_back(j.id, params.rate_full() / j.size);
    }
    return WeightScheme(WeightKind::Slowdown, std::move(w));
}

WeightScheme WeightScheme::custom(std::vector<std::pair<int, double>> weights) {
    return WeightScheme(WeightKind::Custom, std::move(weights));
}

double WeightScheme::weight_of(int job_id) const {
    auto it = std::lower_bound(weights_.begin(), weights_.end(), job_id,
                               [](const auto& e, int id) { return e.first < id; });
    if (it == weights_.end() || it->first != job_id)
        throw std::out_of_range("no weight for job id " + std::to_string(job_id));
    return it->second;
}

AllocationVector::AllocationVector(std::vector<std::pair<int, double>> entries)
    : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end());
    double total = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i > 0 && entries_[i].first == entries_[i - 1].first)
            throw std::domain_error("duplicate job id in allocation");
        double f = entries_[i].second;
        if (!(f >= 0.0) || !(f <= 1.0))
            throw std::domain_error("allocation fraction outside [0, 1]");
        total += f;
    }
    if (total > 1.0 + kSumSlack)
        throw std::domain_error("allocation fractions sum to more than 1");
}

double AllocationVector::fraction_of(int job_id) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), job_id,
                               [](const auto& e, int id) { return e.first < id; });
    if (it == entries_.end() || it->first != job_id) return 0.0;
    return it->second;
}

double AllocationVector::sum() const noexcept {
    double total = 0.0;
    for (const auto& [id, f] : entries_) total += f;
    return total;
}

Instance::Instance(std::vector<Job> jobs, SpeedupParams speedup, WeightScheme weights)
    : jobs_(std::move(jobs)), speedup_(speedup), weights_(std::move(weights)) {
    std::unordered_set<int> seen;
    for (Job& j : jobs_) {
        if (!(j.size > 0.0) || !std::isfinite(j.size))
            throw std::invalid_argument("job size must be positive and finite");
        if (!(j.arrival_time >= 0.0) || !std::isfinite(j.arrival_time))
            throw std::invalid_argument("arrival time must be nonnegative and finite");
        if (!(j.remaining >= 0.0) || !(j.remaining <= j.size))
            throw std::invalid_argument("remaining work outside [0, size]");
        if (!seen.insert(j.id).second)
            throw std::invalid_argument("duplicate job id " + std::to_string(j.id));
        weights_.weight_of(j.id);  // every job must carry a weight
    }
    std::sort(jobs_.begin(), jobs_.end(), [](const Job& a, const Job& b) {
        if (a.size != b.size) return a.size > b.size;
        return a.id < b.id;
    });
    z_.resize(jobs_.size() + 1);
    z_[0] = 0.0;
    for (std::size_t i = 0; i < jobs_.size(); ++i)
        z_[i + 1] = z_[i] + weights_.weight_of(jobs_[i].id);
}

double Instance::weight_of_rank(std::size_t k) const {
    if (k < 1 || k > jobs_.size()) throw std::domain_error("rank out of range");
    return weights_.weight_of(jobs_[k - 1].id);
}

double z_prefix(const Instance& instance, std::size_t k) {
    if (k > instance.jobs_.size())
        throw std::domain_error("prefix index exceeds job count");
    return instance.z_[k];
}

bool weights_favor_small_jobs(const Instance& instance) {
    const auto& jobs = instance.jobs();
    for (std::size_t i = 1; i < jobs.size(); ++i) {
        double prev = instance.weights().weight_of(jobs[i - 1].id);
        double cur = instance.weights().weight_of(jobs[i].id);
        if (cur < prev) return false;
    }
    return true;
}

double slowdown_of(const Job& job, double completion_time, const SpeedupParams& params) {
    if (!(job.size > 0.0)) throw std::domain_error("job size must be positive");
    if (!(completion_time >= job.arrival_time))
        throw std::domain_error("completion precedes arrival");
    double best_alone = job.size / params.rate_full();
    return (completion_time - job.arrival_time) / best_alone;
}

double fit_speedup(std::span<const std::pair<double, double>> points, ExponentBounds bounds) {
    double sxx = 0.0, sxy = 0.0;
    double first_x = 0.0;
    bool have_first = false, distinct = false;
    std::size_t used = 0;
    for (const auto& [k, s] : points) {
        if (!(k > 0.0) || !(s > 0.0))
            throw std::domain_error("speedup samples must have positive coordinates");
        double lx = std::log(k);
        if (!have_first) {
            first_x = lx;
            have_first = true;
        } else if (lx != first_x) {
            distinct = true;
        }
        if (lx == 0.0) continue;  // k = 1 pins s = 1 and carries no slope information
        sxx += lx * lx;
        sxy += lx * std::log(s);
        ++used;
    }
    if (points.size() < 2 || !distinct || used == 0)
        throw std::domain_error("need at least two samples at distinct server counts");
    double p = sxy / sxx;
    return std::clamp(p, bounds.min, bounds.max);
}

}  // namespace hesrpt
