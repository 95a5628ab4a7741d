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

#include "circqkd/loopmodel.hpp"

#include <cmath>
#include <stdexcept>

namespace circqkd {

const char *to_string(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::fiber:
            return "fiber";
        case ComponentKind::delay_fiber:
            return "delay_fiber";
        case ComponentKind::phase_modulator:
            return "phase_modulator";
        case ComponentKind::pol_controller:
            return "pol_controller";
        case ComponentKind::attenuator:
            return "attenuator";
        case ComponentKind::pdl_element:
            return "pdl_element";
    }
    return "?";
}

const char *to_string(Owner owner) {
    switch (owner) {
        case Owner::none:
            return "none";
        case Owner::alice:
            return "alice";
        case Owner::bob:
            return "bob";
    }
    return "?";
}

const char *to_string(Direction direction) {
    return direction == Direction::cw ? "cw" : "ccw";
}

ComponentKind component_kind_from_string(std::string_view name) {
    for (auto k : {ComponentKind::fiber, ComponentKind::delay_fiber, ComponentKind::phase_modulator,
                   ComponentKind::pol_controller, ComponentKind::attenuator, ComponentKind::pdl_element}) {
        if (name == to_string(k)) {
            return k;
        }
    }
    throw std::invalid_argument("unknown component kind '" + std::string(name) +
                                "' (expected fiber, delay_fiber, phase_modulator, pol_controller, "
                                "attenuator or pdl_element)");
}

Owner owner_from_string(std::string_view name) {
    for (auto o : {Owner::none, Owner::alice, Owner::bob}) {
        if (name == to_string(o)) {
            return o;
        }
    }
    throw std::invalid_argument("unknown owner '" + std::string(name) + "' (expected alice or bob)");
}

double Component::power_transmittance() const {
    if (is_fiber()) {
        return std::pow(10.0, -loss_db_per_km * (length_m / 1000.0) / 10.0);
    }
    if (kind == ComponentKind::attenuator) {
        return transmittance;
    }
    return 1.0;
}

Component Component::fiber(std::string label, double length_m, double loss_db_per_km, JonesOperator jones) {
    Component c;
    c.kind = ComponentKind::fiber;
    c.label = std::move(label);
    c.length_m = length_m;
    c.loss_db_per_km = loss_db_per_km;
    c.jones = jones;
    return c;
}

Component Component::delay_fiber(std::string label, double length_m, double loss_db_per_km, JonesOperator jones) {
    Component c = fiber(std::move(label), length_m, loss_db_per_km, jones);
    c.kind = ComponentKind::delay_fiber;
    return c;
}

Component Component::phase_modulator(std::string label, Owner owner, JonesOperator jones) {
    Component c;
    c.kind = ComponentKind::phase_modulator;
    c.label = std::move(label);
    c.owner = owner;
    c.jones = jones;
    return c;
}

Component Component::pol_controller(std::string label, JonesOperator jones) {
    Component c;
    c.kind = ComponentKind::pol_controller;
    c.label = std::move(label);
    c.jones = jones;
    return c;
}

Component Component::attenuator(std::string label, double transmittance) {
    Component c;
    c.kind = ComponentKind::attenuator;
    c.label = std::move(label);
    c.transmittance = transmittance;
    return c;
}

Component Component::pdl_element(std::string label, JonesOperator jones) {
    Component c;
    c.kind = ComponentKind::pdl_element;
    c.label = std::move(label);
    c.jones = jones;
    return c;
}

namespace {

std::string where(size_t index, const Component &c) {
    std::string s = "component " + std::to_string(index);
    if (!c.label.empty()) {
        s += " ('" + c.label + "')";
    }
    return s;
}

size_t find_unique(const LoopConfig &config, auto predicate, const char *what) {
    size_t found = config.components.size();
    for (size_t k = 0; k < config.components.size(); k++) {
        if (predicate(config.components[k])) {
            if (found != config.components.size()) {
                throw std::invalid_argument(std::string("loop must contain exactly one ") + what +
                                            " (found a second at index " + std::to_string(k) + ")");
            }
            found = k;
        }
    }
    if (found == config.components.size()) {
        throw std::invalid_argument(std::string("loop must contain exactly one ") + what + " (found none)");
    }
    return found;
}

}  // namespace

void LoopConfig::validate() const {
    if (components.empty()) {
        throw std::invalid_argument("loop has no components");
    }
    if (!(coupler_ratio > 0 && coupler_ratio < 1)) {
        throw std::invalid_argument("coupler_ratio must lie in (0, 1)");
    }
    if (!std::isfinite(source_pol.norm2())) {
        throw std::invalid_argument("source polarization is not finite");
    }
    for (size_t k = 0; k < components.size(); k++) {
        const auto &c = components[k];
        if (c.kind == ComponentKind::fiber && !(c.length_m > 0)) {
            throw std::invalid_argument(where(k, c) + ": fiber length must be > 0");
        }
        // A zero-length delay is allowed so timing sweeps can reach the degenerate geometry.
        if (c.kind == ComponentKind::delay_fiber && !(c.length_m >= 0)) {
            throw std::invalid_argument(where(k, c) + ": delay length must be >= 0");
        }
        if (c.is_fiber() && !(c.loss_db_per_km >= 0)) {
            throw std::invalid_argument(where(k, c) + ": loss_db_per_km must be >= 0");
        }
        if (c.kind == ComponentKind::attenuator && !(c.transmittance > 0 && c.transmittance <= 1)) {
            throw std::invalid_argument(where(k, c) + ": attenuator transmittance must lie in (0, 1]");
        }
        if (c.kind == ComponentKind::phase_modulator && c.owner == Owner::none) {
            throw std::invalid_argument(where(k, c) + ": phase modulator needs an owner (alice or bob)");
        }
        auto sv = c.jones.singular_values();
        if (!std::isfinite(sv[0]) || sv[0] > 1 + 1e-12) {
            throw std::invalid_argument(where(k, c) + ": Jones operator amplifies (singular value " +
                                        std::to_string(sv[0]) + " > 1)");
        }
    }
    alice_pm_index();
    bob_pm_index();
    attenuator_index();
    delay_index();
}

size_t LoopConfig::alice_pm_index() const {
    return find_unique(
        *this,
        [](const Component &c) { return c.kind == ComponentKind::phase_modulator && c.owner == Owner::alice; },
        "phase modulator owned by alice");
}

size_t LoopConfig::bob_pm_index() const {
    return find_unique(
        *this,
        [](const Component &c) { return c.kind == ComponentKind::phase_modulator && c.owner == Owner::bob; },
        "phase modulator owned by bob");
}

size_t LoopConfig::attenuator_index() const {
    return find_unique(*this, [](const Component &c) { return c.kind == ComponentKind::attenuator; }, "attenuator");
}

size_t LoopConfig::delay_index() const {
    return find_unique(*this, [](const Component &c) { return c.kind == ComponentKind::delay_fiber; },
                       "delay_fiber");
}

size_t LoopConfig::index_of(std::string_view label) const {
    for (size_t k = 0; k < components.size(); k++) {
        if (components[k].label == label) {
            return k;
        }
    }
    throw std::invalid_argument("loop has no component labelled '" + std::string(label) + "'");
}

PathSummary accumulate(const LoopConfig &config, Direction direction) {
    config.validate();
    PathSummary out;
    double power = 1.0;
    const auto &cs = config.components;
    for (size_t j = 0; j < cs.size(); j++) {
        const auto &c = direction == Direction::cw ? cs[j] : cs[cs.size() - 1 - j];
        auto op = direction == Direction::cw ? c.jones : backward(c.jones);
        out.jones_total = op * out.jones_total;
        power *= c.power_transmittance();
        if (c.is_fiber()) {
            out.optical_length_m += c.length_m;
        }
    }
    out.amplitude_transmittance = std::sqrt(power);
    return out;
}

namespace {

struct Arrivals {
    JonesState cw;   // arriving at the coupler's CCW-side port
    JonesState ccw;  // arriving at the coupler's CW-side port
    double bar = 0;  // through amplitude t
    double cross = 0;  // cross amplitude r (the i is applied explicitly)
};

JonesState scale(const JonesState &v, Complex s) {
    return {v.ex * s, v.ey * s};
}

Arrivals arrivals(const LoopConfig &config) {
    if (!config.source_pol.is_normalized()) {
        throw std::invalid_argument("source polarization is not normalized");
    }
    auto cw = accumulate(config, Direction::cw);
    auto ccw = accumulate(config, Direction::ccw);
    Arrivals a;
    a.bar = std::sqrt(config.coupler_ratio);
    a.cross = std::sqrt(1 - config.coupler_ratio);
    // Unit input on port 1: t s leaves toward the CW path, i r s toward the CCW path.
    a.cw = scale(cw.jones_total * config.source_pol, cw.amplitude_transmittance);
    a.ccw = scale(ccw.jones_total * config.source_pol, ccw.amplitude_transmittance);
    return a;
}

}  // namespace

DetectionProbs detection_probs(const LoopConfig &config, const PhasePair &phases) {
    auto a = arrivals(config);
    const Complex i{0, 1};
    Complex e_cw = std::polar(1.0, phases.phi_a);
    Complex e_ccw = std::polar(1.0, phases.phi_b);
    // Field entering the loop-side ports on the way back.
    JonesState at_ccw_port = scale(a.cw, e_cw * a.bar);          // CW pulse returns here
    JonesState at_cw_port = scale(a.ccw, e_ccw * i * a.cross);   // CCW pulse returns here
    // Recombine with the same coupler matrix [[t, i r], [i r, t]].
    JonesState out1{a.bar * at_cw_port.ex + i * a.cross * at_ccw_port.ex,
                    a.bar * at_cw_port.ey + i * a.cross * at_ccw_port.ey};
    JonesState out2{i * a.cross * at_cw_port.ex + a.bar * at_ccw_port.ex,
                    i * a.cross * at_cw_port.ey + a.bar * at_ccw_port.ey};
    return {out1.norm2(), out2.norm2()};
}

LoopResponse LoopResponse::of(const LoopConfig &config) {
    auto a = arrivals(config);
    double t2 = a.bar * a.bar, r2 = a.cross * a.cross;
    LoopResponse out;
    out.power_cw = a.cw.norm2();
    out.power_ccw = a.ccw.norm2();
    out.cross = inner(a.ccw, a.cw);
    out.bar1 = r2 * t2 * (out.power_cw + out.power_ccw);
    out.bar2 = t2 * t2 * out.power_cw + r2 * r2 * out.power_ccw;
    out.swing = 2 * r2 * t2;
    return out;
}

DetectionProbs LoopResponse::at(double delta_phi) const {
    double interference = swing * (std::cos(delta_phi) * cross.real() - std::sin(delta_phi) * cross.imag());
    // Clamp rounding below zero at perfectly dark fringes.
    return {std::max(0.0, bar1 + interference), std::max(0.0, bar2 - interference)};
}

double LoopResponse::visibility() const {
    double denom = std::sqrt(power_cw * power_ccw);
    return denom > 0 ? std::abs(cross) / denom : 0.0;
}

TimingSchedule timing_schedule(const LoopConfig &config, double group_index, double gate_window_s) {
    config.validate();
    if (!(group_index > 1)) {
        throw std::invalid_argument("group_index must be > 1");
    }
    if (!(gate_window_s >= 0)) {
        throw std::invalid_argument("gate window must be >= 0");
    }
    const double speed = kSpeedOfLight / group_index;
    const auto &cs = config.components;
    const size_t n = cs.size();

    // Fiber length travelled before reaching component k, CW order.
    std::vector<double> before(n + 1, 0.0);
    for (size_t k = 0; k < n; k++) {
        before[k + 1] = before[k] + (cs[k].is_fiber() ? cs[k].length_m : 0.0);
    }
    const double total = before[n];

    TimingSchedule out;
    out.gate_window_s = gate_window_s;
    out.loop_transit_s = total / speed;
    std::vector<double> t_cw(n), t_ccw(n);
    for (size_t k = 0; k < n; k++) {
        double own = cs[k].is_fiber() ? cs[k].length_m : 0.0;
        t_cw[k] = before[k] / speed;
        t_ccw[k] = (total - before[k] - own) / speed;
        out.entries.push_back({k, cs[k].label, cs[k].kind, Direction::cw, t_cw[k], t_cw[k] + own / speed + gate_window_s});
    }
    for (size_t j = 0; j < n; j++) {
        size_t k = n - 1 - j;
        double own = cs[k].is_fiber() ? cs[k].length_m : 0.0;
        out.entries.push_back(
            {k, cs[k].label, cs[k].kind, Direction::ccw, t_ccw[k], t_ccw[k] + own / speed + gate_window_s});
    }

    size_t ia = config.alice_pm_index(), ib = config.bob_pm_index();
    out.alice_pm_separation_s = std::abs(t_cw[ia] - t_ccw[ia]);
    out.bob_pm_separation_s = std::abs(t_cw[ib] - t_ccw[ib]);
    out.alice_conflict = out.alice_pm_separation_s <= gate_window_s;
    out.bob_conflict = out.bob_pm_separation_s <= gate_window_s;
    return out;
}

double pdl_penalty(const LoopConfig &config) {
    auto a = arrivals(config);
    double p_cw = a.cw.norm2(), p_ccw = a.ccw.norm2();
    if (!(p_cw > 0) || !(p_ccw > 0)) {
        throw std::domain_error("pdl_penalty: a pulse returns to the coupler with zero power");
    }
    return std::abs(inner(a.ccw, a.cw)) / std::sqrt(p_cw * p_ccw);
}

LoopConfig build_two_party_loop(const TwoPartyGeometry &g) {
    LoopConfig config;
    config.coupler_ratio = g.coupler_ratio;
    auto &cs = config.components;
    cs.push_back(Component::pol_controller("pcc", g.pcc));
    cs.push_back(Component::pol_controller("misalignment", JonesOperator::rotation(g.misalignment_rad)));
    cs.push_back(Component::phase_modulator("pmb", Owner::bob));
    cs.push_back(Component::pol_controller("pcb", g.pcb));
    cs.push_back(Component::delay_fiber("delay", g.delay_m, g.loss_db_per_km, g.delay_jones));
    cs.push_back(Component::fiber("lower_link", g.lower_link_m, g.loss_db_per_km, g.lower_link_jones));
    cs.push_back(Component::pol_controller("pca", g.pca));
    cs.push_back(Component::phase_modulator("pma", Owner::alice));
    cs.push_back(Component::attenuator("attenuator", g.attenuator_transmittance));
    cs.push_back(Component::fiber("upper_link", g.upper_link_m, g.loss_db_per_km, g.upper_link_jones));
    config.validate();
    return config;
}

}  // namespace circqkd
