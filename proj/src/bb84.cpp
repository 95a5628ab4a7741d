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

#include "circqkd/bb84.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <tuple>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

namespace circqkd {

using std::numbers::pi;

double PhaseTable::alice(int basis, int bit) {
    return basis * (pi / 2) + bit * pi;
}

double PhaseTable::bob(int basis) {
    return basis * (pi / 2);
}

AliceChoice alice_choose(RngStream &rng) {
    AliceChoice c;
    c.bit = rng.next_bit();
    c.basis = rng.next_bit();
    c.phi_a = PhaseTable::alice(c.basis, c.bit);
    return c;
}

BobChoice bob_choose(RngStream &rng) {
    BobChoice c;
    c.basis = rng.next_bit();
    c.phi_b = PhaseTable::bob(c.basis);
    return c;
}

std::optional<int> decode(ClickOutcome outcome, int apd1_bit) {
    switch (outcome) {
        case ClickOutcome::none:
            return std::nullopt;
        case ClickOutcome::d1:
            return apd1_bit;
        case ClickOutcome::d2:
            return 1 - apd1_bit;
        case ClickOutcome::both:
            break;
    }
    throw std::logic_error("decode: double click reached the decoder; apply the double-click policy first");
}

ClickOutcome resolve_double_click(ClickOutcome outcome, DoubleClickPolicy policy, RngStream &rng) {
    if (outcome != ClickOutcome::both) {
        return outcome;
    }
    if (policy == DoubleClickPolicy::discard) {
        return ClickOutcome::none;
    }
    return rng.next_bit() ? ClickOutcome::d2 : ClickOutcome::d1;
}

const char *to_string(EveStrategy strategy) {
    return strategy == EveStrategy::off ? "off" : "intercept_resend";
}

EveStrategy eve_strategy_from_string(std::string_view name) {
    if (name == "off") {
        return EveStrategy::off;
    }
    if (name == "intercept_resend") {
        return EveStrategy::intercept_resend;
    }
    throw std::invalid_argument("unknown eve strategy '" + std::string(name) + "' (expected off or intercept_resend)");
}

void EveConfig::validate() const {
    if (!(fraction >= 0 && fraction <= 1)) {
        throw std::invalid_argument("eve.fraction must lie in [0, 1]");
    }
}

namespace {

// Ideal single-photon measurement of a pulse prepared with phi against
// analysis phase phi_meas: outcome 0 (APD1) with probability cos^2(d/2).
double prob_outcome_zero(double phi, double phi_meas) {
    double c = std::cos(0.5 * (phi - phi_meas));
    return c * c;
}

}  // namespace

EveAction eve_transform(const AliceChoice &alice, const EveConfig &eve, RngStream &rng) {
    double u_attack = rng.next_uniform();
    int basis = rng.next_bit();
    double u_outcome = rng.next_uniform();

    EveAction out;
    out.phi_sent = alice.phi_a;
    if (eve.strategy != EveStrategy::intercept_resend || !(u_attack < eve.fraction)) {
        return out;
    }
    out.attacked = true;
    out.basis = basis;
    out.bit = u_outcome < prob_outcome_zero(alice.phi_a, PhaseTable::bob(basis)) ? 0 : 1;
    out.phi_sent = PhaseTable::alice(out.basis, out.bit);
    return out;
}

double SessionStats::qber_stderr() const {
    if (!qber_defined || disclosed_bits == 0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::sqrt(qber * (1 - qber) / static_cast<double>(disclosed_bits));
}

std::pair<double, double> wilson_interval(uint64_t successes, uint64_t trials) {
    if (trials == 0) {
        return {0.0, 1.0};
    }
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double denom = 1 + z * z / n;
    const double center = (p + z * z / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

void SiftTally::add(const PulseRecord &r) {
    pulses_++;
    doubles_ += r.double_click;
    if (r.outcome == ClickOutcome::d1 || r.outcome == ClickOutcome::d2) {
        raw_++;
        (r.outcome == ClickOutcome::d1 ? d1_ : d2_)++;
    }
    if (r.sifted) {
        sifted_++;
        bool wrong = r.decoded_bit.value() != r.alice_bit;
        errors_ += wrong;
        if (r.disclosed) {
            disclosed_++;
            disclosed_errors_ += wrong;
        }
    }
}

void SiftTally::merge(const SiftTally &o) {
    pulses_ += o.pulses_;
    raw_ += o.raw_;
    doubles_ += o.doubles_;
    d1_ += o.d1_;
    d2_ += o.d2_;
    sifted_ += o.sifted_;
    errors_ += o.errors_;
    disclosed_ += o.disclosed_;
    disclosed_errors_ += o.disclosed_errors_;
}

SessionStats SiftTally::stats(double rep_rate_hz) const {
    SessionStats s;
    s.pulses_sent = pulses_;
    s.raw_clicks = raw_;
    s.double_clicks = doubles_;
    s.d1_clicks = d1_;
    s.d2_clicks = d2_;
    s.sifted_bits = sifted_;
    s.errors = errors_;
    s.disclosed_bits = disclosed_;
    s.disclosed_errors = disclosed_errors_;
    s.rep_rate_hz = rep_rate_hz;
    s.raw_rate_hz = pulses_ > 0 ? rep_rate_hz * static_cast<double>(sifted_) / static_cast<double>(pulses_) : 0.0;
    s.qber_defined = disclosed_ > 0;
    if (s.qber_defined) {
        s.qber = static_cast<double>(disclosed_errors_) / static_cast<double>(disclosed_);
        std::tie(s.qber_lo, s.qber_hi) = wilson_interval(disclosed_errors_, disclosed_);
    } else {
        s.qber = std::numeric_limits<double>::quiet_NaN();
        s.qber_lo = 0.0;
        s.qber_hi = 1.0;
    }
    return s;
}

SiftResult sift(std::span<const PulseRecord> records, double rep_rate_hz, int apd1_bit) {
    SiftResult out;
    SiftTally tally;
    for (PulseRecord r : records) {
        bool single = r.outcome == ClickOutcome::d1 || r.outcome == ClickOutcome::d2;
        r.sifted = single && r.alice_basis == r.bob_basis;
        r.decoded_bit = r.sifted ? decode(r.outcome, apd1_bit) : std::nullopt;
        tally.add(r);
        if (r.sifted) {
            out.alice_key.push_back(static_cast<uint8_t>(r.alice_bit));
            out.bob_key.push_back(static_cast<uint8_t>(*r.decoded_bit));
        }
    }
    out.stats = tally.stats(rep_rate_hz);
    return out;
}

std::vector<PhaseCase> phase_cases(const EveConfig &eve) {
    eve.validate();
    const double f = eve.strategy == EveStrategy::intercept_resend ? eve.fraction : 0.0;
    std::vector<PhaseCase> cases;
    for (int bit = 0; bit < 2; bit++) {
        for (int basis = 0; basis < 2; basis++) {
            for (int bob = 0; bob < 2; bob++) {
                const double w = 1.0 / 8.0;
                const double phi_a = PhaseTable::alice(basis, bit);
                const double phi_b = PhaseTable::bob(bob);
                const bool sifted = basis == bob;
                if (f < 1) {
                    cases.push_back({w * (1 - f), phi_a - phi_b, sifted, bit});
                }
                if (f > 0) {
                    for (int eb = 0; eb < 2; eb++) {
                        double p0 = prob_outcome_zero(phi_a, PhaseTable::bob(eb));
                        for (int ebit = 0; ebit < 2; ebit++) {
                            double p = ebit == 0 ? p0 : 1 - p0;
                            if (p <= 0) {
                                continue;
                            }
                            cases.push_back({w * f * 0.5 * p, PhaseTable::alice(eb, ebit) - phi_b, sifted, bit});
                        }
                    }
                }
            }
        }
    }
    return cases;
}

PhaseNoise combined_noise(std::span<const Disturbance> disturbances) {
    PhaseNoise noise;
    double variance = 0;
    for (const auto &d : disturbances) {
        if (!(d.sigma >= 0)) {
            throw std::invalid_argument("disturbance sigma must be >= 0");
        }
        if (d.uniform) {
            noise.kind = PhaseNoise::Kind::uniform;
            return noise;
        }
        // Independent kicks on both passes: the difference has variance 2 sigma^2.
        variance += 2 * d.sigma * d.sigma;
    }
    if (variance > 0) {
        noise.kind = PhaseNoise::Kind::gaussian;
        noise.sigma = std::sqrt(variance);
    }
    return noise;
}

PulseRecord simulate_pulse(const SessionSetup &setup, uint64_t index) {
    PulseRecord r;
    r.index = index;

    RngStream protocol(setup.seed, index, Lane::protocol);
    AliceChoice alice = alice_choose(protocol);
    BobChoice bob = bob_choose(protocol);
    if (setup.fixed_phases) {
        alice.phi_a = setup.fixed_phases->phi_a;
        bob.phi_b = setup.fixed_phases->phi_b;
    }
    r.alice_bit = alice.bit;
    r.alice_basis = alice.basis;
    r.bob_basis = bob.basis;
    r.phi_a = alice.phi_a;
    r.phi_b = bob.phi_b;

    double phi_sent = alice.phi_a;
    if (setup.eve.strategy != EveStrategy::off) {
        RngStream eve_rng(setup.seed, index, Lane::eve);
        auto action = eve_transform(alice, setup.eve, eve_rng);
        r.eve_attacked = action.attacked;
        phi_sent = action.phi_sent;
    }

    double offset = 0;
    if (!setup.disturbances.empty()) {
        RngStream kick(setup.seed, index, Lane::disturbance);
        for (const auto &d : setup.disturbances) {
            if (d.uniform) {
                offset += 2 * pi * kick.next_uniform() - 2 * pi * kick.next_uniform();
            } else if (d.sigma > 0) {
                offset += d.sigma * kick.next_normal() - d.sigma * kick.next_normal();
            }
        }
    }

    auto p = setup.loop.at(phi_sent - bob.phi_b + offset);
    auto q = click_probabilities(p.p1, p.p2, setup.source, setup.detectors);
    RngStream channel(setup.seed, index, Lane::channel);
    ClickOutcome raw = sample_pulse(q, channel);

    RngStream book(setup.seed, index, Lane::bookkeeping);
    r.double_click = raw == ClickOutcome::both;
    r.outcome = resolve_double_click(raw, setup.detectors.double_click_policy, book);
    bool single = r.outcome == ClickOutcome::d1 || r.outcome == ClickOutcome::d2;
    r.sifted = single && r.alice_basis == r.bob_basis && !setup.fixed_phases;
    if (r.sifted) {
        r.decoded_bit = decode(r.outcome, setup.detectors.apd1_bit);
        r.disclosed = setup.disclosed_fraction >= 1.0 || book.next_uniform() < setup.disclosed_fraction;
    }
    return r;
}

SessionResult run_session(const SessionSetup &setup) {
    setup.source.validate();
    setup.detectors.validate();
    setup.eve.validate();
    if (!(setup.disclosed_fraction > 0 && setup.disclosed_fraction <= 1)) {
        throw std::invalid_argument("disclosed_fraction must lie in (0, 1]");
    }

    constexpr uint64_t kShard = 1u << 15;
    const uint64_t shards = (setup.pulses + kShard - 1) / kShard;
    unsigned workers = setup.threads ? setup.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<uint64_t>(workers, std::max<uint64_t>(shards, 1)));

    std::vector<SiftTally> tallies(shards);
    std::vector<std::vector<PulseRecord>> records(setup.keep_transcript ? shards : 0);
    std::atomic<uint64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    auto work = [&] {
        try {
            for (uint64_t s = next++; s < shards && !failed; s = next++) {
                uint64_t begin = s * kShard, end = std::min(setup.pulses, begin + kShard);
                for (uint64_t i = begin; i < end; i++) {
                    auto r = simulate_pulse(setup, i);
                    tallies[s].add(r);
                    if (setup.keep_transcript) {
                        records[s].push_back(r);
                    }
                }
            }
        } catch (...) {
            if (!failed.exchange(true)) {
                failure = std::current_exception();
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; w++) {
            pool.emplace_back(work);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    SessionResult out;
    SiftTally total;
    for (const auto &t : tallies) {
        total.merge(t);
    }
    out.stats = total.stats(setup.source.rep_rate_hz);
    for (auto &chunk : records) {
        out.transcript.insert(out.transcript.end(), chunk.begin(), chunk.end());
    }
    return out;
}

}  // namespace circqkd
