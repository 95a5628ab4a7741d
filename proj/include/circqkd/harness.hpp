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

#ifndef CIRCQKD_HARNESS_HPP
#define CIRCQKD_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "circqkd/bb84.hpp"
#include "circqkd/scenario.hpp"

namespace circqkd {

inline constexpr const char *kCsvSchema = "circqkd.stats.v1";
inline constexpr const char *kSeedPolicy =
    "philox4x32-10; key=seed; counter=(draw, lane, pulse_index); lanes: 0 protocol, 1 channel, 2 eve, "
    "3 disturbance, 4 bookkeeping; sweeps reuse the master seed at every grid point";

/// Command-line style overrides applied on top of a scenario. Applied to the
/// effective document, so they show up in the digest.
struct RunOptions {
    std::optional<uint64_t> seed;
    std::optional<uint64_t> pulses;
    std::optional<std::string> partner;
    bool keep_transcript = false;
    unsigned threads = 0;
};

Scenario with_overrides(const Scenario &scenario, const RunOptions &options);

/// One CSV row: a session at one parameter value.
struct StatsRow {
    std::string label;
    std::optional<double> value;
    SessionStats stats;
    ExpectedSession expected;
};

struct RunReport {
    std::string scenario_name;
    std::string digest;
    uint64_t seed = 0;
    std::string seed_policy = kSeedPolicy;
    std::string axis;  ///< sweep axis, empty for single runs
    std::vector<StatsRow> rows;
    std::vector<PulseRecord> transcript;
    double wall_seconds = 0.0;

    const SessionStats &stats() const {
        return rows.front().stats;
    }
};

/// Closed-form expectation for the scenario (ring scenarios use the
/// configured partner and its bystanders' disturbances).
ExpectedSession expected(const Scenario &scenario);

/// Monte Carlo session for the scenario through loopmodel -> quantumchannel
/// -> bb84 (-> loopnet for rings). Deterministic per seed.
RunReport run(const Scenario &scenario, const RunOptions &options = {});

/// Parameters the calibrator may move. The rate knob mostly sets the click
/// probability, the QBER knob mostly sets the error fraction.
enum class RateKnob { transmittance, efficiency };
enum class QberKnob { visibility, dark_prob };

struct CalibrationTargets {
    double raw_rate_hz = 1200.0;
    double qber = 0.054;
};

struct CalibrationResult {
    Scenario fitted;
    RateKnob rate_knob = RateKnob::transmittance;
    QberKnob qber_knob = QberKnob::visibility;
    double rate_value = 0.0;
    double qber_value = 0.0;
    double visibility = 0.0;  ///< fringe visibility of the fitted loop
    ExpectedSession expected;
    int iterations = 0;
};

/// Parses "transmittance,visibility"-style lists into the two knobs.
std::pair<RateKnob, QberKnob> parse_free_parameters(const std::string &spec);

/// Solves for the two free parameters against the closed-form session
/// oracle: alternating bisections until both targets are met to 1e-6
/// relative. Throws std::invalid_argument when a target is outside the
/// achievable range, stating that range.
CalibrationResult calibrate(const Scenario &scenario, const CalibrationTargets &targets,
                            RateKnob rate_knob = RateKnob::transmittance, QberKnob qber_knob = QberKnob::visibility);

/// Axes accepted by `sweep`.
std::vector<std::string> sweep_axes();

/// "start:stop:count" (inclusive linspace) or "v1,v2,...".
std::vector<double> parse_grid(const std::string &spec);

/// One run per grid value, all with the scenario's master seed. Axis
/// `delta_phi` disables the protocol and drives fixed modulator settings.
RunReport sweep(const Scenario &scenario, const std::string &axis, const std::vector<double> &grid,
                const RunOptions &options = {});

struct FringePoint {
    double delta_phi;
    DetectionProbs probs;
    ClickDistribution clicks;
};

/// Deterministic detection probabilities over `points` equally spaced
/// phase differences in [0, 2 pi).
std::vector<FringePoint> fringe(const Scenario &scenario, int points = 360, const std::string &partner = {});

void write_stats_csv(std::ostream &out, const RunReport &report);
void write_fringe_csv(std::ostream &out, const std::vector<FringePoint> &points);
void write_transcript_csv(std::ostream &out, const std::vector<PulseRecord> &records);
/// Human-readable summary, including wall-clock time.
void write_summary(std::ostream &out, const RunReport &report);

}  // namespace circqkd

#endif
