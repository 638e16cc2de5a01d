#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "spikeplast/layers.hpp"

using namespace spikeplast;

TEST_CASE("conv_forward_current hand cases") {
    SUBCASE("all-zero input stays zero") {
        ConvGeometry g{1, 4, 4, 3, 2};
        std::vector<double> w(static_cast<std::size_t>(g.out_channels) * g.fan_in(), 0.25);
        std::vector<double> x(static_cast<std::size_t>(g.in_neurons()), 0.0);
        std::vector<double> out(static_cast<std::size_t>(g.out_neurons()));
        conv_forward_current(w, g, x, 1, out);
        for (double v : out) CHECK(v == 0.0);
    }
    SUBCASE("1x1 identity scale") {
        ConvGeometry g{1, 1, 1, 1, 1};
        std::vector<double> w{0.5};
        std::vector<double> x{1.0};
        std::vector<double> out(1);
        conv_forward_current(w, g, x, 1, out);
        CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("all-ones window sums the kernel") {
        ConvGeometry g{1, 3, 3, 3, 1};
        std::vector<double> w{0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8, 0.9};
        const double kernel_sum = std::accumulate(w.begin(), w.end(), 0.0);
        std::vector<double> x(9, 1.0);
        std::vector<double> out(1);
        conv_forward_current(w, g, x, 1, out);
        CHECK(out[0] == doctest::Approx(kernel_sum).epsilon(1e-12));
    }
}

TEST_CASE("atb_conv_threshold picks the per-sample maximum") {
    std::vector<double> cur{0.2, 3.2, 1.1};
    CHECK(atb_conv_threshold(cur, 1.0) == doctest::Approx(3.2).epsilon(1e-15));
    CHECK(atb_conv_threshold(cur, 0.5) == doctest::Approx(1.6).epsilon(1e-15));

    // beta = 1 bounds every current by the threshold
    std::vector<double> rnd{0.4, 2.7, 2.69, 0.0};
    const double th = atb_conv_threshold(rnd, 1.0);
    for (double c : rnd) CHECK(c <= th);

    std::vector<double> zero(5, 0.0);
    CHECK(atb_conv_threshold(zero, 1.0) == 0.0);
}

TEST_CASE("asf_value formula and limits") {
    // direct evaluation with the published coefficients
    CHECK(asf_value(0.0, 10.0, 0.4, 8.0) ==
          doctest::Approx(10.0 / (1.0 + std::exp(8.0))).epsilon(1e-12));
    // sigmoid midpoint: sigma = 0 at i = thresh * beta / alpha
    CHECK(asf_value(20.0 * 10.0, 10.0, 0.4, 8.0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(asf_value(0.5 * 3.0, 3.0, 16.0, 8.0) == doctest::Approx(1.5).epsilon(1e-12));
    // saturation toward the threshold, never beyond
    CHECK(asf_value(1e9, 10.0, 0.4, 8.0) <= 10.0);
    CHECK(asf_value(1e9, 10.0, 0.4, 8.0) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK_THROWS_AS(asf_value(1.0, 0.0, 0.4, 8.0), config_error);
}

TEST_CASE("asf is strictly increasing and bounded in (0, thresh)") {
    auto rng = std::mt19937_64(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const double th = 0.1 + 10.0 * unit_draw(rng);
        const double a = 0.5 + 20.0 * unit_draw(rng);
        const double b = 1.0 + 10.0 * unit_draw(rng);
        const double i1 = th * unit_draw(rng);
        const double i2 = i1 + 1e-6 + th * unit_draw(rng);
        const double v1 = asf_value(i1, th, a, b);
        const double v2 = asf_value(i2, th, a, b);
        CHECK(v1 > 0.0);
        CHECK(v1 < th);
        CHECK(v2 > v1);
    }
}

TEST_CASE("atb-conv safety: filtered currents never exceed the threshold") {
    auto rng = std::mt19937_64(17);
    std::vector<double> cur(64);
    for (int trial = 0; trial < 50; ++trial) {
        for (double& c : cur) c = 4.0 * unit_draw(rng) - 0.5;
        const double th = atb_conv_threshold(cur, 1.0);
        if (!(th > 0.0)) continue;
        std::vector<double> filt(cur.size());
        asf_filter(cur, th, 16.0, 8.0, filt);
        for (std::size_t i = 0; i < cur.size(); ++i) {
            CHECK(filt[i] < th);
            CHECK(filt[i] > 0.0);
        }
    }
}

TEST_CASE("wta_select keeps exactly one of the firing set") {
    std::vector<std::uint8_t> none(8, 0);
    CHECK(wta_select(none, 0.3) == -1);

    std::vector<std::uint8_t> single(8, 0);
    single[5] = 1;
    CHECK(wta_select(single, 0.99) == 5);

    std::vector<std::uint8_t> many{1, 0, 1, 1, 0, 1, 0, 0};
    for (double d : {0.0, 0.26, 0.51, 0.76, 0.999}) {
        const int w = wta_select(many, d);
        REQUIRE(w >= 0);
        CHECK(many[static_cast<std::size_t>(w)] == 1);
    }
}

TEST_CASE("wta_select is uniform over the firing set") {
    std::vector<std::uint8_t> fired{0, 1, 1, 0, 1, 1};
    const int k = 4;
    const int trials = 10000;
    std::array<int, 6> hits{};
    auto rng = make_rng(42, RngStream::wta_train, 0);
    for (int t = 0; t < trials; ++t) ++hits[static_cast<std::size_t>(wta_select(fired, unit_draw(rng)))];
    const double p = 1.0 / k;
    const double sigma = std::sqrt(p * (1 - p) / trials);
    for (int i = 0; i < 6; ++i) {
        if (!fired[static_cast<std::size_t>(i)]) {
            CHECK(hits[static_cast<std::size_t>(i)] == 0);
        } else {
            const double freq = static_cast<double>(hits[static_cast<std::size_t>(i)]) / trials;
            CHECK(std::abs(freq - p) <= 3.0 * sigma);
        }
    }
}

TEST_CASE("alic_inhibit gates on half the reference maximum") {
    // max 4 -> gate 2; non-winner at current 3 drops by 1.625 * 4 = 6.5
    std::vector<double> u{1.0, 1.0, 1.0, 0.0};
    std::vector<double> cur{1.9, 3.0, 2.1, 4.0};
    alic_inhibit(u, cur, /*winner=*/3, /*reference_max=*/4.0, /*alpha_inh=*/1.625);
    CHECK(u[0] == 1.0);                                    // below the gate
    CHECK(u[1] == doctest::Approx(1.0 - 6.5).epsilon(1e-15));
    CHECK(u[2] == doctest::Approx(1.0 - 6.5).epsilon(1e-15));
    CHECK(u[3] == 0.0);                                    // the winner is untouched

    // no winner, no inhibition source
    std::vector<double> u2{1.0, 1.0};
    alic_inhibit(u2, cur, -1, 4.0, 1.625);
    CHECK(u2[0] == 1.0);
    CHECK(u2[1] == 1.0);
}

TEST_CASE("fc thresholds are theta_init plus the per-neuron offset") {
    FcLayerState fc;
    fc.inputs = 2;
    fc.neurons = 3;
    fc.theta_init = 10.0;
    fc.theta_plus = {0.0, 2.0, 0.5};
    std::vector<double> th(3);
    fc.thresholds(th);
    CHECK(th[0] == 10.0);
    CHECK(th[1] == 12.0); // needs potential >= 12 to fire
    CHECK(th[2] == 10.5);
}

TEST_CASE("fc_layer_step: zero input never spikes, offsets shift the bar") {
    FcLayerState fc;
    fc.inputs = 1;
    fc.neurons = 2;
    fc.theta_init = 1.0;
    fc.gamma = 6.0;
    fc.theta_plus = {0.0, 2.0};
    fc.neuron.tau_mem = 2.0;
    MembraneState mem(2);
    SpikeTensor winners(1, 2);
    std::vector<double> th(2);
    fc.thresholds(th);
    std::vector<double> zero{0.0, 0.0};
    std::vector<double> draws{0.5};
    for (int t = 0; t < 20; ++t) {
        fc_layer_step(zero, zero, th, 0.0, fc.alpha_inh, true, true, 1, 2, mem, draws, fc.neuron,
                      winners);
        for (auto v : winners.v) CHECK(v == 0);
    }
    // drive of 1.2 crosses 1.0 (neuron 0) but never 3.0 (neuron 1, theta_plus 2)
    std::vector<double> drive{1.2, 1.2};
    bool n0 = false, n1 = false;
    for (int t = 0; t < 40; ++t) {
        fc_layer_step(drive, drive, th, 1.2, fc.alpha_inh, false, true, 1, 2, mem, draws,
                      fc.neuron, winners);
        n0 = n0 || winners.row(0)[0];
        n1 = n1 || winners.row(0)[1];
    }
    CHECK(n0);
    CHECK_FALSE(n1); // equilibrium 2 * 1.2 = 2.4 < 3
}

TEST_CASE("atb_fc_update homeostasis") {
    FcLayerState fc;
    fc.inputs = 1;
    fc.neurons = 3;
    fc.theta_init = 10.0;
    fc.alpha_plus = 0.001;
    fc.gamma = 15.0;
    fc.theta_plus = {0.0, 0.0, 0.0};

    SUBCASE("five spikes raise the offset by alpha_plus * 5") {
        std::vector<std::int64_t> counts{5, 0, 0};
        atb_fc_update(fc, counts);
        CHECK(fc.theta_plus[0] == doctest::Approx(0.005).epsilon(1e-15));
        CHECK(fc.theta_plus[1] == 0.0);
    }
    SUBCASE("no rebalance below the ceiling") {
        fc.theta_plus = {4.0, 1.0, 0.0};
        std::vector<std::int64_t> counts{0, 0, 0};
        atb_fc_update(fc, counts);
        CHECK(fc.theta_plus[0] == 4.0);
        CHECK(fc.theta_plus[1] == 1.0);
    }
    SUBCASE("excess over gamma shifts every offset down") {
        fc.theta_plus = {5.4, 1.0, 0.1};
        std::vector<std::int64_t> counts{0, 0, 0};
        atb_fc_update(fc, counts); // max threshold 15.4 -> bias 0.4
        CHECK(fc.theta_plus[0] == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(fc.theta_plus[1] == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(fc.theta_plus[2] == 0.0); // floored at zero
        double max_th = 0.0;
        for (int j = 0; j < 3; ++j) max_th = std::max(max_th, fc.threshold(j));
        CHECK(max_th == doctest::Approx(15.0).epsilon(1e-12));
    }
}

TEST_CASE("fc threshold ceiling holds after randomized update sequences") {
    FcLayerState fc;
    fc.inputs = 1;
    fc.neurons = 16;
    fc.theta_init = 10.0;
    fc.alpha_plus = 0.05;
    fc.gamma = 15.0;
    fc.theta_plus.assign(16, 0.0);
    auto rng = std::mt19937_64(5);
    for (int round = 0; round < 200; ++round) {
        std::vector<std::int64_t> counts(16);
        for (auto& c : counts) c = static_cast<std::int64_t>(bounded_draw(rng, 40));
        atb_fc_update(fc, counts);
        double max_th = 0.0;
        for (int j = 0; j < 16; ++j) {
            CHECK(fc.theta_plus[static_cast<std::size_t>(j)] >= 0.0);
            max_th = std::max(max_th, fc.threshold(j));
        }
        CHECK(max_th <= fc.gamma + 1e-12);
    }
}

TEST_CASE("max_pool2x2_or") {
    SUBCASE("hand windows") {
        std::vector<std::uint8_t> in{0, 0, 0, 0};
        std::vector<std::uint8_t> out(1);
        max_pool2x2_or(in, 1, 2, 2, out);
        CHECK(out[0] == 0);
        in = {0, 1, 0, 0};
        max_pool2x2_or(in, 1, 2, 2, out);
        CHECK(out[0] == 1);
    }
    SUBCASE("odd trailing row/column is truncated") {
        std::vector<std::uint8_t> in(1 * 5 * 5, 0);
        in[4 * 5 + 4] = 1; // only in the truncated margin
        std::vector<std::uint8_t> out(4);
        max_pool2x2_or(in, 1, 5, 5, out);
        for (auto v : out) CHECK(v == 0);
    }
    SUBCASE("pooled count never exceeds input count") {
        auto rng = std::mt19937_64(3);
        std::vector<std::uint8_t> in(2 * 6 * 6);
        for (auto& v : in) v = static_cast<std::uint8_t>(bounded_draw(rng, 2));
        std::vector<std::uint8_t> out(2 * 3 * 3);
        max_pool2x2_or(in, 2, 6, 6, out);
        int cin = 0, cout = 0;
        for (auto v : in) cin += v;
        for (auto v : out) cout += v;
        CHECK(cout <= cin);
    }
}

TEST_CASE("spike_normalize divides by the per-sample maximum") {
    std::vector<std::int64_t> counts{10, 5, 0};
    std::vector<double> rates(3);
    spike_normalize(counts, 100, rates);
    CHECK(rates[0] == 1.0);
    CHECK(rates[1] == 0.5);
    CHECK(rates[2] == 0.0);

    std::vector<std::int64_t> silent{0, 0};
    std::vector<double> r2(2);
    spike_normalize(silent, 100, r2);
    CHECK(r2[0] == 0.0);
    CHECK(r2[1] == 0.0);

    CHECK_THROWS_AS(spike_normalize(counts, 5, rates), config_error); // count above budget
}

TEST_CASE("conv_layer_step cardinality and silent samples") {
    // two samples, four neurons; sample 1 has no positive current
    const int S = 2, N = 4;
    std::vector<double> drive{1.0, 0.8, 0.2, 0.9, 0.0, 0.0, 0.0, 0.0};
    std::vector<double> thresh{0.9, 0.0};
    MembraneState mem(S * N);
    mem.u[4] = 0.5; // silent sample still decays
    SpikeTensor winners(S, N);
    NeuronConfig cfg;
    std::vector<double> draws{0.7, 0.1};
    conv_layer_step(drive, drive, thresh, 1.0, 1.625, true, S, N, mem, draws, cfg, winners);
    int c0 = 0, c1 = 0;
    for (int j = 0; j < N; ++j) {
        c0 += winners.row(0)[j];
        c1 += winners.row(1)[j];
    }
    CHECK(c0 == 1);
    CHECK(c1 == 0);
    CHECK(mem.u[4] == 0.25); // decay-only step on the silent sample
}

TEST_CASE("alic selectivity: sub-gate neurons see identical trajectories") {
    const int S = 1, N = 6;
    std::vector<double> drive{1.0, 0.9, 0.45, 0.3, 0.2, 0.1};
    std::vector<double> thresh{0.95};
    NeuronConfig cfg;
    std::vector<double> draws{0.0};

    MembraneState with(N), without(N);
    SpikeTensor w1(S, N), w2(S, N);
    for (int t = 0; t < 30; ++t) {
        conv_layer_step(drive, drive, thresh, 1.0, 1.625, true, S, N, with, draws, cfg, w1);
        conv_layer_step(drive, drive, thresh, 1.0, 1.625, false, S, N, without, draws, cfg, w2);
        for (int j = 0; j < N; ++j) {
            if (drive[static_cast<std::size_t>(j)] <= 0.5) // at or below the gate
                CHECK(with.u[static_cast<std::size_t>(j)] == without.u[static_cast<std::size_t>(j)]);
        }
    }
}
