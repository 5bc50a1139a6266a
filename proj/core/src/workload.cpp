#include "hesrpt/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

namespace hesrpt {

namespace {

/// 53-bit mantissa with a half-step offset: strictly inside (0, 1), so
/// logarithms and Pareto inversions never hit an endpoint.
double u01(std::mt19937_64& rng) {
    return ((rng() >> 11) + 0.5) * 0x1p-53;
}

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SizeDist SizeDist::pareto(double shape, double scale) {
    if (!(shape > 0.0)) throw std::invalid_argument("Pareto shape must be > 0");
    if (!(scale > 0.0)) throw std::invalid_argument("Pareto scale must be > 0");
    return {Kind::Pareto, shape, scale};
}

SizeDist SizeDist::deterministic(double size) {
    if (!(size > 0.0)) throw std::invalid_argument("job size must be > 0");
    return {Kind::Deterministic, size, size};
}

SizeDist SizeDist::uniform(double lo, double hi) {
    if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("need 0 < lo <= hi");
    return {Kind::Uniform, lo, hi};
}

bool SizeDist::has_finite_mean() const noexcept {
    return kind != Kind::Pareto || a > 1.0;
}

double SizeDist::mean() const {
    switch (kind) {
        case Kind::Pareto:
            if (!(a > 1.0))
                throw std::domain_error(
                    "Pareto with shape <= 1 has no finite mean; pick an explicit Poisson rate "
                    "instead of a target load");
            return a * b / (a - 1.0);
        case Kind::Deterministic:
            return a;
        case Kind::Uniform:
            return (a + b) / 2.0;
    }
    throw std::logic_error("unreachable");
}

ArrivalProcess ArrivalProcess::batch() { return {Kind::AllAtZero, 0.0}; }

ArrivalProcess ArrivalProcess::poisson(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("arrival rate must be > 0");
    return {Kind::Poisson, lambda};
}

ArrivalProcess ArrivalProcess::target_load(double rho) {
    if (!(rho > 0.0) || !(rho < 1.0))
        throw std::invalid_argument("target load must lie in (0, 1)");
    return {Kind::TargetLoad, rho};
}

std::vector<Job> generate(const WorkloadSpec& spec, const SpeedupParams& params) {
    if (spec.m_jobs < 0) throw std::invalid_argument("job count must be >= 0");
    std::mt19937_64 rng(spec.seed);

    std::vector<double> sizes(spec.m_jobs);
    for (double& x : sizes) {
        double u = u01(rng);
        switch (spec.size_dist.kind) {
            case SizeDist::Kind::Pareto:
                x = spec.size_dist.b * std::pow(u, -1.0 / spec.size_dist.a);
                break;
            case SizeDist::Kind::Deterministic:
                x = spec.size_dist.a;
                break;
            case SizeDist::Kind::Uniform:
                x = spec.size_dist.a + (spec.size_dist.b - spec.size_dist.a) * u;
                break;
        }
    }

    double lambda = 0.0;
    switch (spec.arrivals.kind) {
        case ArrivalProcess::Kind::AllAtZero:
            break;
        case ArrivalProcess::Kind::Poisson:
            lambda = spec.arrivals.value;
            break;
        case ArrivalProcess::Kind::TargetLoad:
            lambda = spec.arrivals.value * params.rate_full() / spec.size_dist.mean();
            break;
    }

    std::vector<Job> jobs;
    jobs.reserve(sizes.size());
    double t = 0.0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (lambda > 0.0) t += -std::log(u01(rng)) / lambda;
        jobs.push_back(make_job(static_cast<int>(i), sizes[i], t));
    }
    return jobs;
}

void write_instance_csv(std::ostream& out, std::span<const Job> jobs) {
    out << "job_id,size,arrival_time\n";
    for (const Job& j : jobs)
        out << j.id << ',' << format17(j.size) << ',' << format17(j.arrival_time) << '\n';
}

void write_instance_csv(const std::string& path, std::span<const Job> jobs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_instance_csv(out, jobs);
}

std::vector<Job> read_instance_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };
    if (!next_line()) throw ParseError("missing header", 1);
    if (line != "job_id,size,arrival_time")
        throw ParseError("expected header 'job_id,size,arrival_time'", lineno);

    std::vector<Job> jobs;
    std::unordered_set<int> seen;
    while (next_line()) {
        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
            throw ParseError("expected exactly 3 comma-separated fields", lineno);
        try {
            std::size_t pos = 0;
            std::string f0 = line.substr(0, c1);
            std::string f1 = line.substr(c1 + 1, c2 - c1 - 1);
            std::string f2 = line.substr(c2 + 1);
            int id = std::stoi(f0, &pos);
            if (pos != f0.size()) throw std::invalid_argument("trailing text after job id");
            double size = std::stod(f1, &pos);
            if (pos != f1.size()) throw std::invalid_argument("trailing text after size");
            double arrival = std::stod(f2, &pos);
            if (pos != f2.size()) throw std::invalid_argument("trailing text after arrival time");
            if (!seen.insert(id).second) throw std::invalid_argument("duplicate job id");
            jobs.push_back(make_job(id, size, arrival));
        } catch (const std::exception& e) {
            throw ParseError(std::string("bad row (") + e.what() + ")", lineno);
        }
    }
    return jobs;
}

std::vector<Job> read_instance_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path + " for reading");
    return read_instance_csv(in);
}

}  // namespace hesrpt
