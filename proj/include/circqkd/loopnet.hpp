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

#ifndef CIRCQKD_LOOPNET_HPP
#define CIRCQKD_LOOPNET_HPP

#include <string>
#include <string_view>
#include <vector>

#include "circqkd/bb84.hpp"
#include "circqkd/loopmodel.hpp"

namespace circqkd {

/// Per-entity optics: a controller, a phase modulator and an attenuator,
/// the same as Alice's module in the two-party loop.
struct EntityModule {
    JonesOperator pc;
    JonesOperator pm_jones;
    double attenuator_transmittance = 1.0;
    /// Extra loss a non-selected module puts on passing pulses.
    double insertion_transmittance = 1.0;
};

struct Entity {
    std::string id;
    EntityModule module;
    /// Fiber from the previous ring node (Bob's delay line for the first entity).
    double link_in_m = 200.0;
    bool selected = false;
    Disturbance disturbance;
};

/// Bob's side of the ring, shared by every session.
struct HubConfig {
    double coupler_ratio = 0.5;
    JonesOperator pcc;
    JonesOperator pcb;
    JonesOperator pmb_jones;
    double delay_m = 800.0;
    JonesState source_pol = JonesState::horizontal();
};

/// Ring of entities. CW order: hub (PCC, PMB, PCB, delay), then each entity
/// preceded by its inbound link, then the closing link back to the coupler.
struct RingConfig {
    HubConfig hub;
    std::vector<Entity> entities;
    double closing_link_m = 200.0;
    double loss_db_per_km = kDefaultFiberLossDbPerKm;

    void validate() const;
    const Entity &entity(std::string_view id) const;
};

/// Flattens the ring into a two-party loop with `id` as Alice. Non-selected
/// modules become passive elements: their controller and modulator Jones
/// operators stay, their modulators apply no phase, and their insertion loss
/// (if any) is an isotropic pdl_element. Throws std::invalid_argument for an
/// unknown id.
LoopConfig select_partner(const RingConfig &ring, std::string_view id);

/// Disturbances of every entity except `id`.
std::vector<Disturbance> bystander_disturbances(const RingConfig &ring, std::string_view id);

struct NetworkSessionParams {
    SourceParams source;
    DetectorParams detectors;
    EveConfig eve;
    uint64_t pulses = 0;
    uint64_t seed = 0;
    double disclosed_fraction = 1.0;
    bool keep_transcript = false;
    unsigned threads = 0;
};

/// Full BB84 session between Bob and `id` over the flattened ring, with phase
/// noise from disturbing bystanders.
SessionResult run_network_session(const RingConfig &ring, std::string_view id, const NetworkSessionParams &params);

enum class Verdict { clean, disturbed, indeterminate };

const char *to_string(Verdict verdict);

inline constexpr double kDefaultDisturbanceThreshold = 0.11;

/// `disturbed` iff the lower edge of the 95% QBER interval exceeds
/// `threshold`; `indeterminate` when no bits were disclosed.
Verdict detect_disturbance(const SessionStats &stats, double threshold = kDefaultDisturbanceThreshold);

}  // namespace circqkd

#endif
