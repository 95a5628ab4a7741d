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

#ifndef CIRCQKD_LOOPMODEL_HPP
#define CIRCQKD_LOOPMODEL_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "circqkd/jones.hpp"

namespace circqkd {

/// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;
/// Group index of silica fiber near 830 nm.
inline constexpr double kDefaultGroupIndex = 1.468;
/// Fiber attenuation used when a fiber omits `loss_db_per_km`.
inline constexpr double kDefaultFiberLossDbPerKm = 2.0;
/// PM drive window used by the timing check, seconds.
inline constexpr double kDefaultGateWindow = 50e-9;

enum class ComponentKind { fiber, delay_fiber, phase_modulator, pol_controller, attenuator, pdl_element };
enum class Owner { none, alice, bob };
enum class Direction { cw, ccw };

const char *to_string(ComponentKind kind);
const char *to_string(Owner owner);
const char *to_string(Direction direction);
ComponentKind component_kind_from_string(std::string_view name);
Owner owner_from_string(std::string_view name);

/// One element of the loop. Which fields matter depends on `kind`:
/// fibers use length/loss, the attenuator uses transmittance, phase
/// modulators use owner. Every kind carries a Jones operator (birefringence,
/// controller setting, diattenuation); it defaults to identity.
struct Component {
    ComponentKind kind = ComponentKind::fiber;
    std::string label;
    double length_m = 0.0;
    double loss_db_per_km = 0.0;
    JonesOperator jones;
    Owner owner = Owner::none;
    double transmittance = 1.0;

    bool is_fiber() const {
        return kind == ComponentKind::fiber || kind == ComponentKind::delay_fiber;
    }
    /// Scalar power transmittance (fiber loss, attenuator). Diattenuation in
    /// `jones` is not included.
    double power_transmittance() const;

    static Component fiber(std::string label, double length_m, double loss_db_per_km = 0.0,
                           JonesOperator jones = {});
    static Component delay_fiber(std::string label, double length_m, double loss_db_per_km = 0.0,
                                 JonesOperator jones = {});
    static Component phase_modulator(std::string label, Owner owner, JonesOperator jones = {});
    static Component pol_controller(std::string label, JonesOperator jones = {});
    static Component attenuator(std::string label, double transmittance);
    static Component pdl_element(std::string label, JonesOperator jones);
};

/// The loop listed in clockwise order. The CW pulse leaves the coupler into
/// components.front() and re-enters it from components.back().
struct LoopConfig {
    std::vector<Component> components;
    /// Power fraction kept on the bar (through) path of the coupler.
    double coupler_ratio = 0.5;
    JonesState source_pol = JonesState::horizontal();

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;
    size_t alice_pm_index() const;
    size_t bob_pm_index() const;
    size_t attenuator_index() const;
    size_t delay_index() const;
    /// Index of the first component with this label; throws if absent.
    size_t index_of(std::string_view label) const;
};

struct PathSummary {
    JonesOperator jones_total;
    double amplitude_transmittance = 1.0;
    double optical_length_m = 0.0;
};

/// Phase-modulator settings, each reduced to [0, 2 pi).
struct PhasePair {
    double phi_a = 0.0;
    double phi_b = 0.0;

    PhasePair() = default;
    PhasePair(double a, double b) : phi_a(wrap_angle(a)), phi_b(wrap_angle(b)) {
    }
    double delta() const {
        return phi_a - phi_b;
    }
};

struct DetectionProbs {
    double p1 = 0.0;  ///< per-photon probability of exiting toward APD1
    double p2 = 0.0;  ///< per-photon probability of exiting toward APD2
};

/// Transfer through the loop in one direction. CW composes forward operators
/// in list order, CCW composes transposed operators in reverse order.
/// Phase-modulator drive phases are not included.
PathSummary accumulate(const LoopConfig &config, Direction direction);

/// Per-photon exit probabilities for the given modulator settings. The CW
/// pulse carries phi_a (Alice modulates it), the CCW pulse carries phi_b.
/// APD1 sits on the input port of the coupler (reached through the
/// circulator), APD2 on the other port.
DetectionProbs detection_probs(const LoopConfig &config, const PhasePair &phases);

/// Interference coefficients of a loop, precomputed once so that per-pulse
/// evaluation is a handful of flops:
///   p1(d) = bar1 + swing * Re(e^{i d} cross)
///   p2(d) = bar2 - swing * Re(e^{i d} cross)
/// where d = phase_cw - phase_ccw and cross = <ccw arrival, cw arrival>.
struct LoopResponse {
    double bar1 = 0.0;
    double bar2 = 0.0;
    double swing = 0.0;
    Complex cross{0.0, 0.0};
    double power_cw = 0.0;   ///< |CW arrival|^2 per unit input
    double power_ccw = 0.0;  ///< |CCW arrival|^2 per unit input

    static LoopResponse of(const LoopConfig &config);
    DetectionProbs at(double delta_phi) const;
    /// Fringe visibility of the arriving pulses, |cross| / sqrt(power_cw power_ccw).
    double visibility() const;
};

struct ScheduleEntry {
    size_t component = 0;
    std::string label;
    ComponentKind kind = ComponentKind::fiber;
    Direction direction = Direction::cw;
    double enter_s = 0.0;  ///< leading edge reaches the component
    double exit_s = 0.0;   ///< trailing edge of the drive window leaves it
};

struct TimingSchedule {
    std::vector<ScheduleEntry> entries;
    double loop_transit_s = 0.0;
    /// Arrival-time separation of the two pulses at Alice's modulator.
    double alice_pm_separation_s = 0.0;
    /// Same at Bob's modulator.
    double bob_pm_separation_s = 0.0;
    double gate_window_s = kDefaultGateWindow;
    /// The two pulses overlap at Alice's modulator, so she cannot phase one
    /// without the other.
    bool alice_conflict = false;
    bool bob_conflict = false;
};

/// Time of flight of both pulses around the loop at speed c / group_index.
/// Overlaps are reported through the conflict flags, not thrown.
TimingSchedule timing_schedule(const LoopConfig &config, double group_index = kDefaultGroupIndex,
                               double gate_window_s = kDefaultGateWindow);

/// Visibility of the returning pulses including diattenuation. Throws
/// std::domain_error if either pulse returns with zero power.
double pdl_penalty(const LoopConfig &config);

/// Fig. 1 style two-party loop, parameterized by lengths and a few knobs.
struct TwoPartyGeometry {
    double lower_link_m = 200.0;  ///< Bob -> Alice fiber, used first by the CW pulse
    double upper_link_m = 200.0;  ///< Alice -> Bob fiber
    double delay_m = 800.0;
    double loss_db_per_km = kDefaultFiberLossDbPerKm;
    double attenuator_transmittance = 1.0;
    /// Residual controller misalignment at the coupler, modeled as a
    /// rotation. Fringe visibility for horizontal input is cos(2 * angle).
    double misalignment_rad = 0.0;
    double coupler_ratio = 0.5;
    JonesOperator pcc;
    JonesOperator pcb;
    JonesOperator pca;
    JonesOperator lower_link_jones;
    JonesOperator upper_link_jones;
    JonesOperator delay_jones;
};

/// Component order (CW): PCC, misalignment, PMB, PCB, delay, lower link,
/// PCA, PMA, attenuator, upper link.
LoopConfig build_two_party_loop(const TwoPartyGeometry &geometry);

}  // namespace circqkd

#endif
