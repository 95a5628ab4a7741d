// Copyright 2026 The circqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "circqkd/bb84.hpp"
#include "doctest.h"

using namespace circqkd;
using std::numbers::pi;

namespace {

SessionSetup ideal_setup(uint64_t pulses, uint64_t seed) {
    TwoPartyGeometry g;
    g.loss_db_per_km = 0;
    SessionSetup s;
    s.loop = LoopResponse::of(build_two_party_loop(g));
    s.pulses = pulses;
    s.seed = seed;
    return s;
}

double expected_error(const SessionSetup &s) {
    auto cases = phase_cases(s.eve);
    return expected_session(s.loop, cases, s.source, s.detectors, combined_noise(s.disturbances)).qber;
}

}  // namespace

TEST_CASE("phase table") {
    CHECK(PhaseTable::alice(0, 0) == 0.0);
    CHECK(PhaseTable::alice(0, 1) == doctest::Approx(pi));
    CHECK(PhaseTable::alice(1, 0) == doctest::Approx(pi / 2));
    CHECK(PhaseTable::alice(1, 1) == doctest::Approx(3 * pi / 2));
    CHECK(PhaseTable::bob(0) == 0.0);
    CHECK(PhaseTable::bob(1) == doctest::Approx(pi / 2));
    for (int basis = 0; basis < 2; basis++) {
        for (int bit = 0; bit < 2; bit++) {
            for (int bob = 0; bob < 2; bob++) {
                double d = std::remainder(PhaseTable::alice(basis, bit) - PhaseTable::bob(bob), 2 * pi);
                if (basis == bob) {
                    CHECK(std::abs(std::abs(d) - (bit ? pi : 0.0)) < 1e-12);
                } else {
                    CHECK(std::abs(std::abs(d) - pi / 2) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("choices are uniform") {
    std::array<int, 4> cells{};
    std::array<int, 2> bob{};
    const int n = 100000;
    for (int k = 0; k < n; k++) {
        RngStream rng(5, k, Lane::protocol);
        auto a = alice_choose(rng);
        CHECK(rng.draws() == 2);
        REQUIRE(a.phi_a == PhaseTable::alice(a.basis, a.bit));
        cells[2 * a.basis + a.bit]++;
        auto b = bob_choose(rng);
        REQUIRE(rng.draws() == 3);
        REQUIRE(b.phi_b == PhaseTable::bob(b.basis));
        bob[b.basis]++;
    }
    for (int c : cells) {
        CHECK(std::abs(c / double(n) - 0.25) < 0.01);
    }
    CHECK(std::abs(bob[0] / double(n) - 0.5) < 0.01);
}

TEST_CASE("decode") {
    CHECK(decode(ClickOutcome::d1) == 0);
    CHECK(decode(ClickOutcome::d2) == 1);
    CHECK_FALSE(decode(ClickOutcome::none).has_value());
    CHECK(decode(ClickOutcome::d1, 1) == 1);
    CHECK(decode(ClickOutcome::d2, 1) == 0);
    CHECK_THROWS_AS(decode(ClickOutcome::both), std::logic_error);
}

TEST_CASE("double-click resolution") {
    RngStream rng(1, 0, Lane::bookkeeping);
    CHECK(resolve_double_click(ClickOutcome::both, DoubleClickPolicy::discard, rng) == ClickOutcome::none);
    CHECK(resolve_double_click(ClickOutcome::d1, DoubleClickPolicy::random_assign, rng) == ClickOutcome::d1);
    int d1 = 0;
    for (int k = 0; k < 10000; k++) {
        auto o = resolve_double_click(ClickOutcome::both, DoubleClickPolicy::random_assign, rng);
        REQUIRE((o == ClickOutcome::d1 || o == ClickOutcome::d2));
        d1 += o == ClickOutcome::d1;
    }
    CHECK(std::abs(d1 / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("wilson interval") {
    auto [lo0, hi0] = wilson_interval(0, 10);
    CHECK(lo0 == 0.0);
    double z2 = 1.959963984540054 * 1.959963984540054;
    CHECK(hi0 == doctest::Approx(z2 / (10 + z2)).epsilon(1e-12));
    auto [lo5, hi5] = wilson_interval(5, 10);
    CHECK(lo5 == doctest::Approx(0.236593).epsilon(1e-5));
    CHECK(hi5 == doctest::Approx(0.763407).epsilon(1e-5));
    CHECK(lo5 + hi5 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("matched bases on ideal optics decode Alice's bit") {
    auto setup = ideal_setup(200000, 3);
    setup.source.mu = 0.5;
    int sifted = 0;
    for (uint64_t k = 0; k < setup.pulses; k++) {
        auto r = simulate_pulse(setup, k);
        if (r.sifted) {
            sifted++;
            REQUIRE(*r.decoded_bit == r.alice_bit);
        }
    }
    CHECK(sifted > 10000);
}

TEST_CASE("mismatched bases give uncorrelated bits") {
    auto setup = ideal_setup(400000, 4);
    setup.source.mu = 0.5;
    int n = 0, same = 0;
    for (uint64_t k = 0; k < setup.pulses; k++) {
        auto r = simulate_pulse(setup, k);
        if (r.alice_basis != r.bob_basis && (r.outcome == ClickOutcome::d1 || r.outcome == ClickOutcome::d2)) {
            n++;
            same += *decode(r.outcome) == r.alice_bit;
        }
    }
    CHECK(n > 10000);
    CHECK(std::abs(same / double(n) - 0.5) < 3 * std::sqrt(0.25 / n));
}

TEST_CASE("sift recomputes from raw fields") {
    auto setup = ideal_setup(100000, 8);
    setup.keep_transcript = true;
    auto result = run_session(setup);
    auto records = result.transcript;
    REQUIRE(records.size() == setup.pulses);
    auto ref = sift(records, setup.source.rep_rate_hz);
    CHECK(ref.stats.sifted_bits == result.stats.sifted_bits);
    CHECK(ref.alice_key == ref.bob_key);
    CHECK(ref.alice_key.size() == ref.stats.sifted_bits);
    CHECK(ref.stats.qber == 0.0);

    // Tampered flags are ignored.
    for (auto &r : records) {
        r.sifted = !r.sifted;
        r.decoded_bit.reset();
    }
    auto again = sift(records, setup.source.rep_rate_hz);
    CHECK(again.stats.sifted_bits == ref.stats.sifted_bits);
    CHECK(again.bob_key == ref.bob_key);

    // Sifted share of single clicks is about one half.
    double clicks = static_cast<double>(ref.stats.raw_clicks);
    CHECK(std::abs(ref.stats.sifted_bits / clicks - 0.5) < 3 * std::sqrt(0.25 / clicks));
}

TEST_CASE("sift with all bases matched and no clicks") {
    std::vector<PulseRecord> records(10);
    for (size_t k = 0; k < records.size(); k++) {
        records[k].index = k;
        records[k].outcome = ClickOutcome::d1;
        records[k].alice_bit = 0;
        records[k].disclosed = true;
    }
    auto s = sift(records, 1e5);
    CHECK(s.stats.sifted_bits == 10);
    CHECK(s.stats.errors == 0);
    CHECK(s.alice_key == s.bob_key);

    for (auto &r : records) {
        r.outcome = ClickOutcome::none;
    }
    auto empty = sift(records, 1e5);
    CHECK(empty.stats.sifted_bits == 0);
    CHECK_FALSE(empty.stats.qber_defined);
    CHECK(std::isnan(empty.stats.qber));
}

TEST_CASE("visibility below one gives QBER (1 - V) / 2") {
    TwoPartyGeometry g;
    g.loss_db_per_km = 0;
    g.misalignment_rad = 0.2;
    auto loop = LoopResponse::of(build_two_party_loop(g));
    SessionSetup s;
    s.loop = loop;
    // Weak pulses, so multi-photon double clicks barely bias the estimate.
    s.source.mu = 0.02;
    s.pulses = 4000000;
    s.seed = 12;
    auto stats = run_session(s).stats;
    double v = loop.visibility();
    CHECK(v == doctest::Approx(std::cos(0.4)).epsilon(1e-12));
    CHECK(stats.sifted_bits > 30000);
    CHECK(std::abs(stats.qber - (1 - v) / 2) < 3 * stats.qber_stderr());
    CHECK(std::abs(stats.qber - expected_error(s)) < 3 * stats.qber_stderr());
}

TEST_CASE("intercept-resend") {
    auto setup = ideal_setup(2500000, 21);
    auto clean = run_session(setup);

    setup.eve = {EveStrategy::intercept_resend, 0.0};
    setup.keep_transcript = true;
    auto zero = run_session(setup);
    CHECK(zero.stats.sifted_bits == clean.stats.sifted_bits);
    CHECK(zero.stats.errors == 0);
    setup.keep_transcript = false;

    setup.eve.fraction = 1.0;
    auto full = run_session(setup).stats;
    CHECK(full.sifted_bits >= 100000);
    CHECK(std::abs(full.qber - 0.25) < 0.01);
    // Discarded double clicks from multi-photon pulses pull the exact value
    // slightly below one quarter.
    CHECK(std::abs(expected_error(setup) - 0.25) < 0.005);
    CHECK(std::abs(full.qber - expected_error(setup)) < 3 * full.qber_stderr());

    setup.eve.fraction = 0.5;
    auto half = run_session(setup).stats;
    CHECK(std::abs(half.qber - 0.125) < 0.01);
    CHECK(std::abs(expected_error(setup) - 0.125) < 0.005);
}

TEST_CASE("fraction zero leaves the transcript unchanged") {
    auto setup = ideal_setup(20000, 22);
    setup.keep_transcript = true;
    auto a = run_session(setup).transcript;
    setup.eve = {EveStrategy::intercept_resend, 0.0};
    auto b = run_session(setup).transcript;
    REQUIRE(a.size() == b.size());
    for (size_t k = 0; k < a.size(); k++) {
        REQUIRE(a[k].outcome == b[k].outcome);
        REQUIRE(a[k].alice_bit == b[k].alice_bit);
        REQUIRE(a[k].bob_basis == b[k].bob_basis);
        REQUIRE(a[k].decoded_bit == b[k].decoded_bit);
        REQUIRE_FALSE(b[k].eve_attacked);
    }
}

TEST_CASE("expected QBER is non-decreasing in the attacked fraction") {
    auto setup = ideal_setup(1, 1);
    setup.detectors.dark_prob = 1e-4;
    setup.source.mu = 1e-6;
    double last = -1;
    for (int k = 0; k <= 20; k++) {
        setup.eve = {EveStrategy::intercept_resend, k / 20.0};
        double q = expected_error(setup);
        REQUIRE(q >= last - 1e-15);
        last = q;
    }
}

TEST_CASE("phase cases") {
    for (auto eve : {EveConfig{}, EveConfig{EveStrategy::intercept_resend, 0.3}}) {
        auto cases = phase_cases(eve);
        double total = 0, sifted = 0;
        for (const auto &c : cases) {
            total += c.weight;
            sifted += c.sifted ? c.weight : 0;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(sifted == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("QBER composition formula") {
    // [ (1 - V)/2 p_signal + p_dark_sift / 2 ] / [p_signal + p_dark_sift], with
    // p_signal the photon-induced sifted click probability and p_dark_sift the
    // dark-induced one. Leading order in mu and d: multi-photon pulses bias
    // it by about mu eta relative.
    RngStream rng(31, 0, Lane::config);
    for (int k = 0; k < 20; k++) {
        TwoPartyGeometry g;
        g.loss_db_per_km = 0;
        g.misalignment_rad = 0.3 * rng.next_uniform();
        SessionSetup s;
        s.loop = LoopResponse::of(build_two_party_loop(g));
        s.source.mu = 0.02 + 0.08 * rng.next_uniform();
        s.detectors.efficiency = 0.2 + 0.8 * rng.next_uniform();
        s.detectors.dark_prob = 1e-4 * rng.next_uniform();
        double v = s.loop.visibility();
        double signal = 0.5 * -std::expm1(-s.source.mu * s.detectors.efficiency);
        double dark_sift = 0.5 * 2 * s.detectors.dark_prob * std::exp(-s.source.mu * s.detectors.efficiency);
        double formula = (0.5 * (1 - v) * signal + 0.5 * dark_sift) / (signal + dark_sift);
        double oracle = expected_error(s);
        CAPTURE(k);
        REQUIRE(std::abs(formula - oracle) <= s.source.mu * s.detectors.efficiency * oracle + 1e-6);
    }
}

TEST_CASE("sessions do not depend on the thread count") {
    auto setup = ideal_setup(300000, 41);
    setup.detectors.dark_prob = 1e-3;
    setup.disclosed_fraction = 0.3;
    setup.threads = 1;
    auto one = run_session(setup).stats;
    setup.threads = 4;
    auto four = run_session(setup).stats;
    CHECK(one.sifted_bits == four.sifted_bits);
    CHECK(one.errors == four.errors);
    CHECK(one.disclosed_bits == four.disclosed_bits);
    CHECK(one.disclosed_errors == four.disclosed_errors);
    CHECK(one.raw_clicks == four.raw_clicks);
    double share = one.disclosed_bits / double(one.sifted_bits);
    CHECK(std::abs(share - 0.3) < 3 * std::sqrt(0.21 / one.sifted_bits));
}

TEST_CASE("tally merge is order independent") {
    auto setup = ideal_setup(30000, 42);
    setup.detectors.dark_prob = 1e-2;
    std::vector<PulseRecord> records;
    for (uint64_t k = 0; k < setup.pulses; k++) {
        records.push_back(simulate_pulse(setup, k));
    }
    SiftTally forward, a, b;
    for (size_t k = 0; k < records.size(); k++) {
        forward.add(records[k]);
        (k % 3 ? a : b).add(records[records.size() - 1 - k]);
    }
    b.merge(a);
    auto x = forward.stats(1e5), y = b.stats(1e5);
    CHECK(x.sifted_bits == y.sifted_bits);
    CHECK(x.errors == y.errors);
    CHECK(x.raw_clicks == y.raw_clicks);
    CHECK(x.qber == y.qber);
}

TEST_CASE("combined noise") {
    std::vector<Disturbance> none;
    CHECK_FALSE(combined_noise(none).active());
    std::vector<Disturbance> two{{0.3, false}, {0.4, false}};
    auto g = combined_noise(two);
    CHECK(g.kind == PhaseNoise::Kind::gaussian);
    CHECK(g.sigma == doctest::Approx(std::sqrt(2 * (0.09 + 0.16))).epsilon(1e-15));
    two.push_back({0.0, true});
    CHECK(combined_noise(two).kind == PhaseNoise::Kind::uniform);
}

TEST_CASE("eve config validation") {
    CHECK_THROWS_AS((EveConfig{EveStrategy::intercept_resend, 1.5}.validate()), std::invalid_argument);
    CHECK_THROWS_AS(eve_strategy_from_string("photon_splitting"), std::invalid_argument);
    CHECK(eve_strategy_from_string("intercept_resend") == EveStrategy::intercept_resend);
}
