#include "hesrpt/policies.hpp"

#include "hesrpt/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace hesrpt;

namespace {

PolicyState state_of(std::vector<ActiveJob> active, double p, double n,
                     WeightKind objective = WeightKind::FlowTime, int quanta = 1000,
                     double alpha = 1.0) {
    return PolicyState{std::move(active), SpeedupParams(p, n), objective, quanta, alpha};
}

ActiveJob aj(int id, double size, double remaining) {
    return ActiveJob{id, size, remaining, 0.0};
}

}  // namespace

TEST_SUITE("policies") {

TEST_CASE("srpt picks the smallest remaining work") {
    auto st = state_of({aj(0, 3, 2), aj(1, 2, 1), aj(2, 5, 4)}, 0.5, 100);
    AllocationVector v = srpt_decide(st);
    CHECK(v.fraction_of(1) == 1.0);
    CHECK(v.sum() == 1.0);

    auto tie = state_of({aj(4, 2, 1), aj(3, 2, 1)}, 0.5, 100);
    CHECK(srpt_decide(tie).fraction_of(3) == 1.0);
}

TEST_CASE("equi splits evenly") {
    auto st = state_of({aj(0, 1, 1), aj(1, 2, 2), aj(2, 3, 3), aj(3, 4, 4)}, 0.5, 100);
    AllocationVector v = equi_decide(st);
    for (int id : {0, 1, 2, 3}) CHECK(v.fraction_of(id) == 0.25);
    CHECK(v.sum() <= 1.0 + AllocationVector::kSumSlack);
}

TEST_CASE("hell concentrates when efficiency rises with batch size") {
    // 2p-1 > 0: the score grows with the batch, one job takes every quantum.
    auto st = state_of({aj(0, 1, 1), aj(1, 1, 1)}, 0.9, 100, WeightKind::FlowTime, 2);
    AllocationVector v = hell_decide(st);
    CHECK(v.fraction_of(0) == 1.0);  // tie on score, lower id wins
    CHECK(v.fraction_of(1) == 0.0);

    auto skew = state_of({aj(0, 3, 3), aj(1, 1, 1)}, 0.9, 100, WeightKind::FlowTime, 4);
    AllocationVector w = hell_decide(skew);
    CHECK(w.fraction_of(1) == 1.0);  // smaller remaining work scores higher
}

TEST_CASE("hell spreads when efficiency falls with batch size") {
    // 2p-1 < 0: one quantum at a time, alternating over equal jobs.
    auto st = state_of({aj(0, 1, 1), aj(1, 1, 1)}, 0.3, 100, WeightKind::FlowTime, 2);
    AllocationVector v = hell_decide(st);
    CHECK(v.fraction_of(0) == 0.5);
    CHECK(v.fraction_of(1) == 0.5);
}

TEST_CASE("hell at p=0.5 reduces to smallest-remaining-first") {
    // 2p-1 = 0 flattens the efficiency term; only 1/remaining is left.
    auto st = state_of({aj(0, 2, 2), aj(1, 1, 1)}, 0.5, 100, WeightKind::FlowTime, 8);
    AllocationVector v = hell_decide(st);
    CHECK(v.fraction_of(0) == 0.0);
    CHECK(v.fraction_of(1) == 1.0);
}

TEST_CASE("knee with a huge threshold gives one quantum each, rest to smallest") {
    auto st = state_of({aj(0, 3, 3), aj(1, 2, 2), aj(2, 1, 1)}, 0.5, 1000,
                       WeightKind::FlowTime, 1000, 1e9);
    AllocationVector v = knee_decide(st);
    CHECK(v.fraction_of(0) == doctest::Approx(0.001).epsilon(1e-14));
    CHECK(v.fraction_of(1) == doctest::Approx(0.001).epsilon(1e-14));
    CHECK(v.fraction_of(2) == doctest::Approx(0.998).epsilon(1e-14));
}

TEST_CASE("knee with a tiny threshold hands everything to the first knee") {
    // Every knee saturates at G; id order then decides who drinks first.
    auto st = state_of({aj(0, 3, 3), aj(1, 2, 2), aj(2, 1, 1)}, 0.5, 1000,
                       WeightKind::FlowTime, 1000, 1e-12);
    AllocationVector v = knee_decide(st);
    CHECK(v.fraction_of(0) == 1.0);
    CHECK(v.fraction_of(1) == 0.0);
    CHECK(v.fraction_of(2) == 0.0);
}

TEST_CASE("knee and hell validate their knobs") {
    auto st = state_of({aj(0, 1, 1)}, 0.5, 100);
    st.quanta = 0;
    CHECK_THROWS_AS(knee_decide(st), std::invalid_argument);
    CHECK_THROWS_AS(hell_decide(st), std::invalid_argument);
    st.quanta = 100;
    st.knee_alpha = 0.0;
    CHECK_THROWS_AS(knee_decide(st), std::invalid_argument);
    st.knee_alpha = -2.0;
    CHECK_THROWS_AS(knee_decide(st), std::invalid_argument);
}

TEST_CASE("rs weighs remaining against original size") {
    // id 1 carries more remaining work but a smaller product.
    auto st = state_of({aj(0, 4, 1), aj(1, 2, 1.5)}, 0.5, 100);
    CHECK(rs_decide(st).fraction_of(1) == 1.0);

    auto tie = state_of({aj(0, 2, 2), aj(1, 4, 1)}, 0.5, 100);  // both products 4
    CHECK(rs_decide(tie).fraction_of(0) == 1.0);
}

TEST_CASE("adaptive closed form ranks by remaining work") {
    auto st = state_of({aj(0, 1, 1), aj(1, 1, 1)}, 0.5, 1.0);
    AllocationVector v = adaptive_hesrpt_decide(st);
    CHECK(v.fraction_of(0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(v.fraction_of(1) == doctest::Approx(0.75).epsilon(1e-12));

    // More remaining work = larger rank = smaller share.
    auto skew = state_of({aj(0, 1, 0.5), aj(1, 2, 2)}, 0.5, 1.0);
    AllocationVector w = adaptive_hesrpt_decide(skew);
    CHECK(w.fraction_of(1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(w.fraction_of(0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("adaptive slowdown weights use original sizes") {
    // Weights s(N)/size = (0.5, 1): z = (0.5, 1.5), q = 2, so the larger job
    // holds (0.5/1.5)^2 = 1/9 and the smaller the rest.
    auto st = state_of({aj(0, 2, 2), aj(1, 1, 1)}, 0.5, 1.0, WeightKind::Slowdown);
    AllocationVector v = adaptive_hesrpt_decide(st);
    CHECK(v.fraction_of(0) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK(v.fraction_of(1) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("make_policy knows every name") {
    for (const char* name : {"hesrpt", "srpt", "equi", "hell", "knee", "rs"}) {
        auto policy = make_policy(name);
        REQUIRE(policy != nullptr);
        CHECK(policy->name() == name);
    }
    CHECK_THROWS_AS(make_policy("lifo"), std::invalid_argument);
    CHECK_THROWS_AS(make_policy(""), std::invalid_argument);
}

TEST_CASE("every policy is pure and respects the active set") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> sdist(0.5, 4.0);
    for (const char* name : {"hesrpt", "srpt", "equi", "hell", "knee", "rs"}) {
        auto policy = make_policy(name);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<ActiveJob> active;
            int m = 1 + static_cast<int>(rng() % 6);
            for (int i = 0; i < m; ++i) {
                double size = sdist(rng);
                active.push_back(aj(i * 3, size, size * 0.5 + 0.1));
            }
            auto st = state_of(std::move(active), 0.3 + 0.1 * (trial % 5), 1000,
                               trial % 2 ? WeightKind::Slowdown : WeightKind::FlowTime,
                               64, 0.01);
            AllocationVector a = policy->decide(st);
            AllocationVector b = policy->decide(st);
            CHECK(a.entries() == b.entries());
            CHECK(a.sum() <= 1.0 + AllocationVector::kSumSlack);
            for (const auto& [id, frac] : a.entries()) {
                bool known = false;
                for (const ActiveJob& j : st.active) known |= (j.id == id);
                CHECK(known);
                CHECK(frac >= 0.0);
                CHECK(frac <= 1.0);
            }
        }
    }
}

TEST_CASE("policies reject an empty active set") {
    PolicyState st{{}, SpeedupParams(0.5, 10.0), WeightKind::FlowTime, 10, 1.0};
    CHECK_THROWS_AS(srpt_decide(st), std::invalid_argument);
    CHECK_THROWS_AS(equi_decide(st), std::invalid_argument);
    CHECK_THROWS_AS(hell_decide(st), std::invalid_argument);
    CHECK_THROWS_AS(knee_decide(st), std::invalid_argument);
    CHECK_THROWS_AS(rs_decide(st), std::invalid_argument);
    CHECK_THROWS_AS(adaptive_hesrpt_decide(st), std::invalid_argument);
}

TEST_CASE("knee_tune_alpha returns the grid argmin") {
    std::vector<std::vector<Job>> batches = {
        {make_job(0, 3.0), make_job(1, 2.0), make_job(2, 1.0)},
        {make_job(0, 1.0), make_job(1, 1.0)}};
    SpeedupParams params(0.5, 1000.0);
    std::vector<double> grid = {1e-9, 1e-3, 10.0};

    double tuned =
        knee_tune_alpha(batches, params, WeightKind::FlowTime, 200, grid);

    auto policy = make_policy("knee");
    double best = std::numeric_limits<double>::infinity();
    double best_alpha = grid.front();
    for (double alpha : grid) {
        SimOptions opts;
        opts.quanta = 200;
        opts.knee_alpha = alpha;
        double score = 0.0;
        for (const auto& batch : batches) {
            score += simulate(batch, *policy, params,
                              WeightScheme::flow_time(batch), opts)
                         .mean_flow_time;
        }
        if (score < best) {
            best = score;
            best_alpha = alpha;
        }
    }
    CHECK(tuned == best_alpha);

    CHECK_THROWS_AS(
        knee_tune_alpha({}, params, WeightKind::FlowTime, 200, grid),
        std::invalid_argument);
    CHECK_THROWS_AS(
        knee_tune_alpha(batches, params, WeightKind::FlowTime, 200, {}),
        std::invalid_argument);
}

}  // TEST_SUITE
