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

#include "circqkd/loopnet.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace circqkd {

void RingConfig::validate() const {
    if (entities.empty()) {
        throw std::invalid_argument("ring needs at least one entity");
    }
    std::set<std::string> ids;
    int selected = 0;
    for (const auto &e : entities) {
        if (e.id.empty()) {
            throw std::invalid_argument("ring entity with empty id");
        }
        if (!ids.insert(e.id).second) {
            throw std::invalid_argument("duplicate ring entity id '" + e.id + "'");
        }
        if (!(e.link_in_m > 0)) {
            throw std::invalid_argument("entity '" + e.id + "': link_in_m must be > 0");
        }
        if (!(e.disturbance.sigma >= 0)) {
            throw std::invalid_argument("entity '" + e.id + "': disturbance sigma must be >= 0");
        }
        if (!(e.module.insertion_transmittance > 0 && e.module.insertion_transmittance <= 1)) {
            throw std::invalid_argument("entity '" + e.id + "': insertion_transmittance must lie in (0, 1]");
        }
        selected += e.selected;
    }
    if (selected > 1) {
        throw std::invalid_argument("at most one ring entity may be selected per session");
    }
    if (!(closing_link_m > 0)) {
        throw std::invalid_argument("ring closing_link_m must be > 0");
    }
    if (!(hub.delay_m >= 0)) {
        throw std::invalid_argument("hub delay_m must be >= 0");
    }
}

const Entity &RingConfig::entity(std::string_view id) const {
    for (const auto &e : entities) {
        if (e.id == id) {
            return e;
        }
    }
    std::string known;
    for (const auto &e : entities) {
        known += (known.empty() ? "" : ", ") + e.id;
    }
    throw std::invalid_argument("unknown ring entity '" + std::string(id) + "' (ring has: " + known + ")");
}

LoopConfig select_partner(const RingConfig &ring, std::string_view id) {
    ring.validate();
    ring.entity(id);
    for (const auto &e : ring.entities) {
        if (e.selected && e.id != id) {
            throw std::invalid_argument("ring already has '" + e.id + "' selected; cannot select '" +
                                        std::string(id) + "'");
        }
    }

    LoopConfig config;
    config.coupler_ratio = ring.hub.coupler_ratio;
    config.source_pol = ring.hub.source_pol;
    auto &cs = config.components;
    cs.push_back(Component::pol_controller("pcc", ring.hub.pcc));
    cs.push_back(Component::phase_modulator("pmb", Owner::bob, ring.hub.pmb_jones));
    cs.push_back(Component::pol_controller("pcb", ring.hub.pcb));
    cs.push_back(Component::delay_fiber("delay", ring.hub.delay_m, ring.loss_db_per_km));
    for (size_t k = 0; k < ring.entities.size(); k++) {
        const auto &e = ring.entities[k];
        const auto &m = e.module;
        cs.push_back(Component::fiber("link_" + std::to_string(k), e.link_in_m, ring.loss_db_per_km));
        cs.push_back(Component::pol_controller(e.id + ".pc", m.pc));
        if (e.id == id) {
            cs.push_back(Component::phase_modulator(e.id + ".pm", Owner::alice, m.pm_jones));
            cs.push_back(Component::attenuator(e.id + ".attenuator", m.attenuator_transmittance));
        } else {
            cs.push_back(Component::pol_controller(e.id + ".pm", m.pm_jones));
            if (m.insertion_transmittance < 1) {
                double a = std::sqrt(m.insertion_transmittance);
                cs.push_back(Component::pdl_element(e.id + ".insertion", JonesOperator::diag(a, a)));
            }
        }
    }
    cs.push_back(Component::fiber("link_" + std::to_string(ring.entities.size()), ring.closing_link_m,
                                  ring.loss_db_per_km));
    config.validate();
    return config;
}

std::vector<Disturbance> bystander_disturbances(const RingConfig &ring, std::string_view id) {
    ring.entity(id);
    std::vector<Disturbance> out;
    for (const auto &e : ring.entities) {
        if (e.id != id && e.disturbance.active()) {
            out.push_back(e.disturbance);
        }
    }
    return out;
}

SessionResult run_network_session(const RingConfig &ring, std::string_view id, const NetworkSessionParams &params) {
    SessionSetup setup;
    setup.loop = LoopResponse::of(select_partner(ring, id));
    setup.disturbances = bystander_disturbances(ring, id);
    setup.source = params.source;
    setup.detectors = params.detectors;
    setup.eve = params.eve;
    setup.pulses = params.pulses;
    setup.seed = params.seed;
    setup.disclosed_fraction = params.disclosed_fraction;
    setup.keep_transcript = params.keep_transcript;
    setup.threads = params.threads;
    return run_session(setup);
}

const char *to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::clean:
            return "clean";
        case Verdict::disturbed:
            return "disturbed";
        case Verdict::indeterminate:
            return "indeterminate";
    }
    return "?";
}

Verdict detect_disturbance(const SessionStats &stats, double threshold) {
    if (!(threshold >= 0 && threshold <= 1)) {
        throw std::invalid_argument("disturbance threshold must lie in [0, 1]");
    }
    if (!stats.qber_defined || stats.disclosed_bits == 0) {
        return Verdict::indeterminate;
    }
    return stats.qber_lo > threshold ? Verdict::disturbed : Verdict::clean;
}

}  // namespace circqkd
