#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spikeplast/common.hpp"
#include "spikeplast/plasticity.hpp"

using namespace spikeplast;

TEST_CASE("trace recurrence: decay then accumulate") {
    TraceState tr(1, 1, 0.99);
    std::vector<double> pre{1.0};
    tr.step(pre);
    CHECK(tr.x[0] == 1.0); // first spike sets the trace to exactly 1

    pre[0] = 0.0;
    tr.step(pre);
    CHECK(tr.x[0] == doctest::Approx(0.99).epsilon(1e-15));

    pre[0] = 1.0;
    tr.step(pre); // 0.99 * 0.99 + 1
    CHECK(tr.x[0] == doctest::Approx(1.9801).epsilon(1e-12));
}

TEST_CASE("trace stays non-negative and decays geometrically when silent") {
    TraceState tr(2, 3, 0.9);
    std::vector<double> pre(6, 1.0);
    tr.step(pre);
    std::fill(pre.begin(), pre.end(), 0.0);
    double expect = 1.0;
    for (int k = 0; k < 20; ++k) {
        tr.step(pre);
        expect *= 0.9;
        for (double v : tr.x) {
            CHECK(v >= 0.0);
            CHECK(v == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("accumulate_stdp pivots on x_offset") {
    TraceState tr(1, 1, 0.99);
    UpdateAccumulator acc(1, 1);

    std::vector<std::uint8_t> quiet{0};
    tr.x[0] = 1.0;
    accumulate_stdp(acc, tr, quiet, 1, 0.3);
    CHECK(acc.delta_w[0] == 0.0);
    CHECK(acc.empty());

    std::vector<std::uint8_t> fire{1};
    accumulate_stdp(acc, tr, fire, 1, 0.3);
    CHECK(acc.delta_w[0] == doctest::Approx(0.7).epsilon(1e-15));

    acc.clear();
    tr.x[0] = 0.1;
    accumulate_stdp(acc, tr, fire, 1, 0.3);
    CHECK(acc.delta_w[0] == doctest::Approx(-0.2).epsilon(1e-12)); // depression below the pivot
}

TEST_CASE("apply_stb_update divides by the full batch window") {
    SUBCASE("batch of one reduces to the single update") {
        UpdateAccumulator acc(1, 1);
        acc.delta_w[0] = 0.7;
        acc.contribution_count[0] = 1;
        std::vector<double> w{0.0};
        StdpConfig cfg{0.3, 0.99, 1, 1};
        CHECK(apply_stb_update(w, acc, cfg));
        CHECK(w[0] == doctest::Approx(0.7).epsilon(1e-15));
    }
    SUBCASE("sum of contributions over N*T slots") {
        UpdateAccumulator acc(1, 1);
        for (double c : {0.7, 0.69, -0.2, 0.0}) acc.delta_w[0] += c;
        acc.contribution_count[0] = 3;
        std::vector<double> w{0.0};
        StdpConfig cfg{0.3, 0.99, 2, 2};
        CHECK(apply_stb_update(w, acc, cfg));
        CHECK(w[0] == doctest::Approx(0.2975).epsilon(1e-15));
    }
    SUBCASE("silent batch is a logged no-op") {
        UpdateAccumulator acc(4, 2);
        std::vector<double> w{1.0, 2.0, 3.0, 4.0};
        StdpConfig cfg{0.3, 0.99, 2, 2};
        CHECK_FALSE(apply_stb_update(w, acc, cfg));
        CHECK(w == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    }
}

TEST_CASE("normalize_fc hand example and fixed point") {
    std::vector<double> w{1.0, 3.0};
    normalize_fc(w, 1, 2, 0.01);
    CHECK(w[0] == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(0.015).epsilon(1e-15));

    std::vector<double> uniform(8, 3.7);
    normalize_fc(uniform, 2, 4, 0.01);
    for (double v : uniform) CHECK(v == doctest::Approx(0.01).epsilon(1e-15));

    auto rng = std::mt19937_64(7);
    std::vector<double> rand_w(40);
    for (double& v : rand_w) v = unit_draw(rng) + 0.05;
    normalize_fc(rand_w, 4, 10, 0.01);
    for (int j = 0; j < 4; ++j) {
        double mean = 0.0;
        for (int k = 0; k < 10; ++k) mean += rand_w[static_cast<std::size_t>(j) * 10 + k];
        mean /= 10.0;
        CHECK(std::abs(mean - 0.01) < 1e-12);
        CHECK(std::abs(mean * (1.0 / 0.01) - 1.0) < 1e-9);
    }

    std::vector<double> degenerate{1.0, -1.0};
    CHECK_THROWS_AS(normalize_fc(degenerate, 1, 2, 0.01), numeric_fault);
}

TEST_CASE("normalize_conv standardizes each kernel") {
    std::vector<double> w{0.0, 1.0, 2.0};
    normalize_conv(w, 1, 3, 1.0);
    const double r = std::sqrt(1.5);
    CHECK(w[0] == doctest::Approx(-r).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(w[2] == doctest::Approx(r).epsilon(1e-12));

    // idempotent on already-normalized input
    std::vector<double> again = w;
    normalize_conv(again, 1, 3, 1.0);
    for (int k = 0; k < 3; ++k) CHECK(again[k] == doctest::Approx(w[k]).epsilon(1e-12));

    auto rng = std::mt19937_64(11);
    std::vector<double> rand_w(3 * 25);
    for (double& v : rand_w) v = unit_draw(rng);
    normalize_conv(rand_w, 3, 25, 1.0);
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        for (int k = 0; k < 25; ++k) mean += rand_w[static_cast<std::size_t>(c) * 25 + k];
        mean /= 25.0;
        for (int k = 0; k < 25; ++k) {
            const double d = rand_w[static_cast<std::size_t>(c) * 25 + k] - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / 25.0);
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(sd - 1.0) < 1e-9);
    }

    std::vector<double> constant(4, 0.5);
    CHECK_THROWS_AS(normalize_conv(constant, 1, 4, 1.0), numeric_fault);
}

TEST_CASE("window oracle basics") {
    const double tau_plus = -1.0 / std::log(0.99); // e^{-1/tau} = 0.99
    CHECK(window_stdp_oracle({}, {}, 1.0, tau_plus, 0.3) == 0.0);

    std::vector<int> pre{0}, post{1};
    CHECK(window_stdp_oracle(pre, post, 1.0, tau_plus, 0.3) ==
          doctest::Approx(0.69).epsilon(1e-9));

    // dt = 0 pairs are excluded by the window form
    std::vector<int> same{1};
    CHECK(window_stdp_oracle(same, same, 1.0, tau_plus, 0.3) ==
          doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("trace recurrence matches the window oracle when pre precedes post") {
    // randomized small instances: <=10 timesteps, <=5 synapses
    const double lambda = 0.99;
    const double tau_plus = -1.0 / std::log(lambda);
    const double x_offset = 0.3;
    std::mt19937_64 rng(20240817);

    for (int trial = 0; trial < 200; ++trial) {
        const int timesteps = 4 + static_cast<int>(bounded_draw(rng, 7)); // 4..10
        const int synapses = 1 + static_cast<int>(bounded_draw(rng, 5));
        const int split = 1 + static_cast<int>(bounded_draw(rng, timesteps - 1));

        // pre spikes strictly before `split`, post spikes at or after it
        std::vector<std::vector<int>> pre_times(static_cast<std::size_t>(synapses));
        std::vector<int> post_times;
        std::vector<std::vector<std::uint8_t>> pre(static_cast<std::size_t>(timesteps),
                                                   std::vector<std::uint8_t>(synapses, 0));
        std::vector<std::uint8_t> post(static_cast<std::size_t>(timesteps), 0);
        for (int t = 0; t < split; ++t)
            for (int k = 0; k < synapses; ++k)
                if (bounded_draw(rng, 2)) {
                    pre[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] = 1;
                    pre_times[static_cast<std::size_t>(k)].push_back(t);
                }
        for (int t = split; t < timesteps; ++t)
            if (bounded_draw(rng, 2)) {
                post[static_cast<std::size_t>(t)] = 1;
                post_times.push_back(t);
            }

        TraceState tr(1, synapses, lambda);
        UpdateAccumulator acc(static_cast<std::size_t>(synapses), 1);
        for (int t = 0; t < timesteps; ++t) {
            std::vector<double> p(static_cast<std::size_t>(synapses));
            for (int k = 0; k < synapses; ++k) p[static_cast<std::size_t>(k)] =
                pre[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
            tr.step(p);
            std::vector<std::uint8_t> ps{post[static_cast<std::size_t>(t)]};
            accumulate_stdp(acc, tr, ps, 1, x_offset);
        }
        for (int k = 0; k < synapses; ++k) {
            const double expect = window_stdp_oracle(pre_times[static_cast<std::size_t>(k)],
                                                     post_times, 1.0, tau_plus, x_offset);
            CHECK(std::abs(acc.delta_w[static_cast<std::size_t>(k)] - expect) <= 1e-9);
        }
    }
}
