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

#ifndef CIRCQKD_SCENARIO_HPP
#define CIRCQKD_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "circqkd/bb84.hpp"
#include "circqkd/loopmodel.hpp"
#include "circqkd/loopnet.hpp"
#include "circqkd/quantumchannel.hpp"
#include "json.hpp"

namespace circqkd {

/// Rejected scenario input. The message names the file, the location
/// (line/column for syntax errors, JSON pointer for field errors) and the
/// violated rule.
class ScenarioError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

struct ProtocolParams {
    uint64_t pulses = 1000000;
    double disclosed_fraction = 1.0;
    double disturbance_threshold = kDefaultDisturbanceThreshold;
    /// Ring partner used by `run`; empty for two-party loops.
    std::string partner;
};

/// A fully validated simulation setup.
///
/// `effective` is the input document with every default filled in. It is
/// the single source of truth: the typed fields are derived from it, the
/// digest hashes it, and sweeps/calibration edit it and re-validate.
struct Scenario {
    std::string name;
    SourceParams source;
    DetectorParams detectors;
    std::variant<LoopConfig, RingConfig> loop;
    double group_index = kDefaultGroupIndex;
    ProtocolParams protocol;
    EveConfig eve;
    uint64_t seed = 1;
    nlohmann::json effective;

    bool is_ring() const {
        return std::holds_alternative<RingConfig>(loop);
    }
    /// Two-party loop, or the ring flattened for `partner` (falls back to
    /// protocol.partner).
    LoopConfig loop_for(std::string_view partner = {}) const;
    std::vector<Disturbance> disturbances_for(std::string_view partner = {}) const;
    /// 16 hex digits of FNV-1a over the canonical effective document.
    std::string digest() const;
};

Scenario load_scenario(const std::filesystem::path &path);
Scenario parse_scenario(std::string_view text, std::string_view origin = "<scenario>");
Scenario scenario_from_json(const nlohmann::json &doc, std::string_view origin = "<scenario>");

/// Jones operator description used in scenario files:
///   "identity" | {"rotation": a} | {"retarder": {"azimuth": a, "retardance": r}}
///   | {"pc": [q_in, half, q_out]} | {"pdl": {"azimuth": a, "t_max": x, "t_min": y}}
///   | {"random_unitary": seed} | {"phase": a}
///   | {"matrix": [[[re, im], [re, im]], [[re, im], [re, im]]]}
JonesOperator jones_from_json(const nlohmann::json &spec, const std::string &path = "");

std::string fnv1a64_hex(std::string_view bytes);

}  // namespace circqkd

#endif
