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

#ifndef CIRCQKD_BB84_HPP
#define CIRCQKD_BB84_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "circqkd/loopmodel.hpp"
#include "circqkd/quantumchannel.hpp"
#include "circqkd/rng.hpp"

namespace circqkd {

/// Phase-coded BB84. Alice: basis 0 -> {0, pi}, basis 1 -> {pi/2, 3pi/2}
/// indexed by bit. Bob: basis 0 -> 0, basis 1 -> pi/2.
struct PhaseTable {
    static double alice(int basis, int bit);
    static double bob(int basis);
};

struct AliceChoice {
    int bit = 0;
    int basis = 0;
    double phi_a = 0.0;
};

struct BobChoice {
    int basis = 0;
    double phi_b = 0.0;
};

/// Two draws from `rng`: bit, then basis.
AliceChoice alice_choose(RngStream &rng);
/// One draw from `rng`.
BobChoice bob_choose(RngStream &rng);

/// d1 -> apd1_bit, d2 -> the other bit, none -> nullopt. A double click must
/// be resolved by the policy first; passing `both` throws std::logic_error.
std::optional<int> decode(ClickOutcome outcome, int apd1_bit = 0);

/// Applies the double-click policy. `discard` maps both -> none;
/// `random_assign` draws one bit from `rng` to pick a detector.
ClickOutcome resolve_double_click(ClickOutcome outcome, DoubleClickPolicy policy, RngStream &rng);

enum class EveStrategy { off, intercept_resend };

const char *to_string(EveStrategy strategy);
EveStrategy eve_strategy_from_string(std::string_view name);

struct EveConfig {
    EveStrategy strategy = EveStrategy::off;
    double fraction = 0.0;  ///< share of pulses attacked

    void validate() const;
    bool active() const {
        return strategy == EveStrategy::intercept_resend && fraction > 0;
    }
};

struct EveAction {
    bool attacked = false;
    int basis = 0;
    int bit = 0;
    double phi_sent = 0.0;  ///< phase the pulse carries on to Bob
};

/// Intercept-resend on one pulse. With probability `fraction` Eve measures in
/// a random basis, her outcome drawn from the ideal interference law, and
/// re-prepares the pulse with the phase encoding her result. Otherwise the
/// pulse passes unchanged. Always consumes three draws from `rng` so attack
/// decisions for a pulse do not depend on the configured fraction.
EveAction eve_transform(const AliceChoice &alice, const EveConfig &eve, RngStream &rng);

struct PulseRecord {
    uint64_t index = 0;
    int alice_bit = 0;
    int alice_basis = 0;
    int bob_basis = 0;
    double phi_a = 0.0;
    double phi_b = 0.0;
    ClickOutcome outcome = ClickOutcome::none;  ///< after the double-click policy
    bool double_click = false;                  ///< both detectors fired
    bool sifted = false;
    std::optional<int> decoded_bit;
    bool disclosed = false;  ///< sacrificed for QBER estimation
    bool eve_attacked = false;
};

struct SessionStats {
    uint64_t pulses_sent = 0;
    uint64_t raw_clicks = 0;  ///< single clicks after the double-click policy
    uint64_t double_clicks = 0;
    uint64_t d1_clicks = 0;
    uint64_t d2_clicks = 0;
    uint64_t sifted_bits = 0;
    uint64_t errors = 0;  ///< over the full sifted string
    uint64_t disclosed_bits = 0;
    uint64_t disclosed_errors = 0;
    double rep_rate_hz = 0.0;
    double raw_rate_hz = 0.0;  ///< sifted bits per second
    bool qber_defined = false;
    double qber = 0.0;     ///< disclosed_errors / disclosed_bits
    double qber_lo = 0.0;  ///< 95% Wilson interval
    double qber_hi = 0.0;

    /// Binomial standard error of the QBER estimate.
    double qber_stderr() const;
};

/// Wilson score interval at 95%.
std::pair<double, double> wilson_interval(uint64_t successes, uint64_t trials);

/// Order-independent fold over pulse records.
class SiftTally {
   public:
    void add(const PulseRecord &record);
    void merge(const SiftTally &other);
    SessionStats stats(double rep_rate_hz) const;

   private:
    uint64_t pulses_ = 0, raw_ = 0, doubles_ = 0, d1_ = 0, d2_ = 0;
    uint64_t sifted_ = 0, errors_ = 0, disclosed_ = 0, disclosed_errors_ = 0;
};

struct SiftResult {
    std::vector<uint8_t> alice_key;
    std::vector<uint8_t> bob_key;
    SessionStats stats;
};

/// Basis reconciliation: keeps single-click records whose bases match, in
/// record order, decodes them, and estimates the QBER over the disclosed
/// ones. The records' own sifted/decoded fields are recomputed, not trusted.
SiftResult sift(std::span<const PulseRecord> records, double rep_rate_hz, int apd1_bit = 0);

/// Enumerates the protocol's (Alice bit, Alice basis, Bob basis) cases, and
/// Eve's basis and outcome when she is active, as weighted phase differences
/// for the closed-form session oracle.
std::vector<PhaseCase> phase_cases(const EveConfig &eve = {});

/// Phase noise injected by one element in the loop, applied independently to
/// each of the two pulses as they pass it.
struct Disturbance {
    double sigma = 0.0;    ///< Gaussian phase std dev, radians
    bool uniform = false;  ///< fully random phase instead

    bool active() const {
        return uniform || sigma > 0;
    }
};

/// Phase-difference noise equivalent to a set of disturbances.
PhaseNoise combined_noise(std::span<const Disturbance> disturbances);

struct SessionSetup {
    LoopResponse loop;
    SourceParams source;
    DetectorParams detectors;
    EveConfig eve;
    std::vector<Disturbance> disturbances;
    uint64_t pulses = 0;
    uint64_t seed = 0;
    double disclosed_fraction = 1.0;
    /// Fixed modulator settings instead of random BB84 choices (fringe scans).
    std::optional<PhasePair> fixed_phases;
    bool keep_transcript = false;
    /// 0 = hardware concurrency.
    unsigned threads = 0;
};

struct SessionResult {
    SessionStats stats;
    std::vector<PulseRecord> transcript;  ///< index order; empty unless requested
};

/// Simulates one pulse. Deterministic in (setup.seed, index).
PulseRecord simulate_pulse(const SessionSetup &setup, uint64_t index);

/// Monte Carlo session. Pulse indices are sharded across threads; merging is
/// count addition, so the result does not depend on the thread count.
SessionResult run_session(const SessionSetup &setup);

}  // namespace circqkd

#endif
