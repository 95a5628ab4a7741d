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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>

#include "circqkd/harness.hpp"
#include "oracles.hpp"

using namespace circqkd;
using std::numbers::pi;

namespace {

int failures = 0;

void report(int id, const char *name, bool ok, const std::string &detail) {
    std::printf("criterion %d %-34s %s  %s\n", id, name, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Scenario shipped(const std::string &name) {
    return load_scenario(std::string(CIRCQKD_SOURCE_DIR) + "/scenarios/" + name);
}

LoopConfig ideal_loop() {
    TwoPartyGeometry g;
    g.loss_db_per_km = 0;
    return build_two_party_loop(g);
}

LoopConfig random_loop(uint64_t seed) {
    RngStream rng(seed, 0, Lane::config);
    TwoPartyGeometry g;
    g.loss_db_per_km = 3 * rng.next_uniform();
    g.attenuator_transmittance = 0.05 + 0.95 * rng.next_uniform();
    g.coupler_ratio = 0.2 + 0.6 * rng.next_uniform();
    g.pcc = JonesOperator::random_unitary(seed * 8 + 1);
    g.pcb = JonesOperator::random_unitary(seed * 8 + 2);
    g.pca = JonesOperator::random_unitary(seed * 8 + 3);
    g.lower_link_jones = JonesOperator::random_unitary(seed * 8 + 4);
    g.upper_link_jones = JonesOperator::random_unitary(seed * 8 + 5);
    g.delay_jones = JonesOperator::random_unitary(seed * 8 + 6);
    g.misalignment_rad = rng.next_uniform();
    return build_two_party_loop(g);
}

JonesState random_state(RngStream &rng) {
    double a = rng.next_normal(), b = rng.next_normal(), c = rng.next_normal(), d = rng.next_normal();
    double n = std::sqrt(a * a + b * b + c * c + d * d);
    return {{a / n, b / n}, {c / n, d / n}};
}

void interference_law() {
    auto config = ideal_loop();
    double worst_law = 0, worst_sum = 0;
    for (int k = 0; k < 360; k++) {
        double d = 2 * pi * k / 360;
        auto p = detection_probs(config, {d, 0.0});
        worst_law = std::max(worst_law, std::abs(p.p1 - std::pow(std::cos(d / 2), 2)));
        worst_sum = std::max(worst_sum, std::abs(p.p1 + p.p2 - 1));
    }
    report(1, "interference law", worst_law < 1e-12 && worst_sum < 1e-12,
           fmt("max |p1 - cos^2| = %.2e, max |p1 + p2 - 1| = %.2e", worst_law, worst_sum));
}

void self_alignment() {
    RngStream rng(2, 0, Lane::config);
    double worst = 0;
    for (uint64_t k = 0; k < 1000; k++) {
        auto config = random_loop(k);
        PhasePair phases(2 * pi * rng.next_uniform(), 2 * pi * rng.next_uniform());
        auto before = detection_probs(config, phases);
        auto idx = static_cast<size_t>(rng.next_uniform() * config.components.size());
        auto &c = config.components[idx];
        c.jones = c.jones.scaled(std::polar(1.0, 2 * pi * rng.next_uniform()));
        auto after = detection_probs(config, phases);
        worst = std::max({worst, std::abs(after.p1 - before.p1), std::abs(after.p2 - before.p2)});
    }
    report(2, "self-alignment invariance", worst < 1e-12, fmt("1000 perturbations, max change %.2e", worst));
}

void birefringence_compensation() {
    RngStream rng(3, 0, Lane::config);
    double worst_sym = 0, worst_general = 0;
    for (uint64_t k = 0; k < 1000; k++) {
        auto state = random_state(rng);

        auto config = ideal_loop();
        config.source_pol = state;
        config.components[config.index_of("lower_link")].jones = JonesOperator::random_symmetric_unitary(k);
        worst_sym = std::max(worst_sym, std::abs(LoopResponse::of(config).visibility() - 1));

        auto U = JonesOperator::random_unitary(10000 + k);
        config.components[config.index_of("lower_link")].jones = U;
        auto u = oracle::from(U);
        oracle::V psi{state.ex, state.ey};
        double want = std::abs(oracle::dot(psi, oracle::apply(oracle::mul(oracle::conj(u), u), psi)));
        worst_general = std::max(worst_general, std::abs(LoopResponse::of(config).visibility() - want));
        worst_general = std::max(worst_general, std::abs(visibility(state, U, backward(U)) - want));
    }
    report(3, "birefringence compensation", worst_sym < 1e-10 && worst_general < 1e-10,
           fmt("symmetric max |V - 1| = %.2e, general max |V - oracle| = %.2e", worst_sym, worst_general));
}

void timing_stagger() {
    auto lab = shipped("lab.json");
    auto t = timing_schedule(lab.loop_for(), lab.group_index);
    TwoPartyGeometry g;
    g.delay_m = 0;
    auto zero = timing_schedule(build_two_party_loop(g));
    report(4, "timing stagger", !t.alice_conflict && zero.alice_conflict,
           fmt("lab separation at PMA %.4f us (conflict %g); zero delay conflict %g", t.alice_pm_separation_s * 1e6,
               t.alice_conflict, zero.alice_conflict));
}

void statistics_oracle() {
    RngStream rng(5, 0, Lane::config);
    int bad = 0;
    double worst = 0;
    for (int k = 0; k < 20; k++) {
        SessionSetup s;
        TwoPartyGeometry g;
        g.loss_db_per_km = 2 * rng.next_uniform();
        g.lower_link_m = 100 + 2000 * rng.next_uniform();
        g.upper_link_m = 100 + 2000 * rng.next_uniform();
        g.attenuator_transmittance = 0.2 + 0.8 * rng.next_uniform();
        g.misalignment_rad = 0.4 * rng.next_uniform();
        g.coupler_ratio = 0.4 + 0.2 * rng.next_uniform();
        s.loop = LoopResponse::of(build_two_party_loop(g));
        s.source.mu = 0.05 + 0.95 * rng.next_uniform();
        s.detectors.efficiency = 0.1 + 0.9 * rng.next_uniform();
        s.detectors.dark_prob = 1e-3 * rng.next_uniform();
        s.detectors.double_click_policy =
            rng.next_bit() ? DoubleClickPolicy::random_assign : DoubleClickPolicy::discard;
        if (rng.next_bit()) {
            s.eve = {EveStrategy::intercept_resend, rng.next_uniform()};
        }
        if (rng.next_bit()) {
            s.disturbances = {{0.5 * rng.next_uniform(), false}};
        }
        s.pulses = 1000000;
        s.seed = 1000 + k;
        auto cases = phase_cases(s.eve);
        auto e = expected_session(s.loop, cases, s.source, s.detectors, combined_noise(s.disturbances));
        auto st = run_session(s).stats;
        double n = static_cast<double>(st.pulses_sent);
        double rate_se = s.source.rep_rate_hz * std::sqrt(e.p_sifted * (1 - e.p_sifted) / n);
        double qber_se = std::sqrt(e.qber * (1 - e.qber) / static_cast<double>(st.sifted_bits));
        double z_rate = std::abs(st.raw_rate_hz - e.raw_rate_hz) / rate_se;
        double z_qber = qber_se > 0 ? std::abs(st.qber - e.qber) / qber_se : (st.errors == 0 ? 0.0 : 1e9);
        worst = std::max({worst, z_rate, z_qber});
        bad += (z_rate > 3) + (z_qber > 3);
    }
    report(5, "statistics oracle", bad == 0,
           fmt("20 parameter sets, %g of 40 checks beyond 3 SE, worst %.2f SE", bad, worst));
}

void intercept_resend() {
    auto base = shipped("intercept_resend.json");
    auto full = run(base).stats();
    auto doc = base.effective;
    doc["eve"]["fraction"] = 0.5;
    auto half = run(scenario_from_json(doc, "intercept_resend_half")).stats();
    bool ok = full.sifted_bits >= 100000 && half.sifted_bits >= 100000 && std::abs(full.qber - 0.25) <= 0.01 &&
              std::abs(half.qber - 0.125) <= 0.01;
    report(6, "intercept-resend", ok,
           fmt("fraction 1: QBER %.4f over %.0f bits; fraction 0.5: QBER %.4f", full.qber, double(full.sifted_bits),
               half.qber));
}

void lab_reproduction() {
    auto s = shipped("lab_calibrated.json");
    double v = LoopResponse::of(s.loop_for()).visibility();
    auto e = expected(s);
    RunOptions o;
    o.pulses = 10000000;
    auto st = run(s, o).stats();
    bool ok = std::abs(st.raw_rate_hz - 1200) <= 0.05 * 1200 && std::abs(st.qber - 0.054) <= 0.005 &&
              std::abs(e.p_sifted - 0.012) < 1e-6 && std::abs(v - 0.892) < 1e-3;
    report(7, "lab reproduction", ok,
           fmt("raw %.1f Hz, QBER %.4f (fit: sifted prob %.6f, V %.4f)", st.raw_rate_hz, st.qber, e.p_sifted, v));
}

void network_equivalence() {
    RingConfig one;
    one.entities.push_back({"alice", {}, 200.0, true, {}});
    NetworkSessionParams params;
    params.pulses = 1000000;
    params.seed = 8;
    auto net = run_network_session(one, "alice", params).stats;
    SessionSetup setup;
    setup.loop = LoopResponse::of(build_two_party_loop({}));
    setup.pulses = params.pulses;
    setup.seed = params.seed;
    auto two = run_session(setup).stats;
    bool equal = net.sifted_bits == two.sifted_bits && net.errors == two.errors && net.raw_clicks == two.raw_clicks &&
                 net.double_clicks == two.double_clicks && net.d1_clicks == two.d1_clicks;

    auto quiet_s = shipped("ring4.json");
    auto quiet = run(quiet_s).stats();
    auto quiet_v = detect_disturbance(quiet, quiet_s.protocol.disturbance_threshold);
    auto noisy_s = shipped("ring4_disturbed.json");
    auto noisy = run(noisy_s).stats();
    auto noisy_v = detect_disturbance(noisy, noisy_s.protocol.disturbance_threshold);
    bool ok = equal && quiet_v == Verdict::clean && std::abs(noisy.qber - 0.5) <= 0.01 &&
              noisy_v == Verdict::disturbed;
    std::string detail = std::string("1-entity == two-party: ") + (equal ? "yes" : "no") + "; quiet ring " +
                         to_string(quiet_v) + fmt(" (QBER %.4f); disturbed ring QBER %.4f ", quiet.qber, noisy.qber) +
                         to_string(noisy_v);
    report(8, "network equivalence", ok, detail);
}

void determinism() {
    int mismatched = 0, runs = 0;
    for (const char *name : {"minimal.json", "ideal.json", "lab.json", "lab_calibrated.json",
                             "intercept_resend.json", "ring4.json", "ring4_disturbed.json"}) {
        auto s = shipped(name);
        RunOptions a, b;
        a.threads = 1;
        b.threads = 3;
        std::ostringstream x, y;
        write_stats_csv(x, run(s, a));
        write_stats_csv(y, run(s, b));
        mismatched += x.str() != y.str();
        runs++;
    }
    report(9, "determinism", mismatched == 0,
           fmt("%g shipped scenarios run twice (1 and 3 threads), %g CSV mismatches", runs, mismatched));
}

}  // namespace

int main() {
    interference_law();
    self_alignment();
    birefringence_compensation();
    timing_stagger();
    statistics_oracle();
    intercept_resend();
    lab_reproduction();
    network_equivalence();
    determinism();
    std::printf("%d of 9 criteria failed\n", failures);
    return failures ? 1 : 0;
}
