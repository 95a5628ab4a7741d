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

#include "circqkd/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace circqkd {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string &path, const std::string &message) {
    throw ScenarioError((path.empty() ? std::string("/") : path) + ": " + message);
}

std::string type_name(const json &v) {
    return v.type_name();
}

const json &empty_object() {
    static const json empty = json::object();
    return empty;
}

double as_number(const json &v, const std::string &path) {
    if (!v.is_number()) {
        fail(path, "expected a number, got " + type_name(v));
    }
    return v.get<double>();
}

// Walks one JSON object, records which keys were read, mirrors every value
// (given or defaulted) into `out`, and rejects keys nobody asked for.
class Reader {
   public:
    Reader(const json &node, std::string path, json &out) : node_(node), path_(std::move(path)), out_(out) {
        if (!node_.is_object()) {
            fail(path_, "expected an object, got " + type_name(node_));
        }
        if (!out_.is_object()) {
            out_ = json::object();
        }
    }

    std::string at(const std::string &key) const {
        return path_ + "/" + key;
    }

    bool has(const std::string &key) const {
        return node_.contains(key);
    }

    double number(const std::string &key, double fallback) {
        seen_.insert(key);
        double v = has(key) ? as_number(node_[key], at(key)) : fallback;
        out_[key] = v;
        return v;
    }

    uint64_t count(const std::string &key, uint64_t fallback) {
        seen_.insert(key);
        uint64_t v = fallback;
        if (has(key)) {
            const auto &n = node_[key];
            if (n.is_number_unsigned()) {
                v = n.get<uint64_t>();
            } else if (n.is_number_integer() && n.get<int64_t>() >= 0) {
                v = static_cast<uint64_t>(n.get<int64_t>());
            } else if (n.is_number_float() && n.get<double>() >= 0 && n.get<double>() == std::floor(n.get<double>()) &&
                       n.get<double>() < 1.8446744073709552e19) {
                v = static_cast<uint64_t>(n.get<double>());
            } else {
                fail(at(key), "expected a non-negative integer, got " + n.dump());
            }
        }
        out_[key] = v;
        return v;
    }

    bool boolean(const std::string &key, bool fallback) {
        seen_.insert(key);
        bool v = fallback;
        if (has(key)) {
            if (!node_[key].is_boolean()) {
                fail(at(key), "expected true or false, got " + type_name(node_[key]));
            }
            v = node_[key].get<bool>();
        }
        out_[key] = v;
        return v;
    }

    std::string string(const std::string &key, const std::string &fallback) {
        seen_.insert(key);
        std::string v = fallback;
        if (has(key)) {
            if (!node_[key].is_string()) {
                fail(at(key), "expected a string, got " + type_name(node_[key]));
            }
            v = node_[key].get<std::string>();
        }
        out_[key] = v;
        return v;
    }

    /// Value copied verbatim (already-structured sub-specs such as Jones operators).
    const json &raw(const std::string &key, const json &fallback) {
        seen_.insert(key);
        const json &v = has(key) ? node_[key] : fallback;
        out_[key] = v;
        return v;
    }

    const json *child(const std::string &key) {
        seen_.insert(key);
        return has(key) ? &node_[key] : nullptr;
    }

    json &out(const std::string &key) {
        return out_[key];
    }

    void finish() const {
        for (const auto &item : node_.items()) {
            if (!seen_.count(item.key())) {
                std::string known;
                for (const auto &k : seen_) {
                    known += (known.empty() ? "" : ", ") + k;
                }
                fail(at(item.key()), "unknown key (accepted here: " + known + ")");
            }
        }
    }

   private:
    const json &node_;
    std::string path_;
    json &out_;
    std::set<std::string> seen_;
};

// Prefix invariant violations raised by the typed validators with a path.
template <typename F>
void validated(const std::string &path, F &&check) {
    try {
        check();
    } catch (const ScenarioError &) {
        throw;
    } catch (const std::invalid_argument &e) {
        fail(path, e.what());
    }
}

Complex complex_from_json(const json &v, const std::string &path) {
    if (v.is_number()) {
        return {v.get<double>(), 0.0};
    }
    if (!v.is_array() || v.size() != 2) {
        fail(path, "expected a complex number as [re, im]");
    }
    return {as_number(v[0], path + "/0"), as_number(v[1], path + "/1")};
}

JonesState state_from_json(const json &v, const std::string &path) {
    if (v.is_string()) {
        if (v == "horizontal") {
            return JonesState::horizontal();
        }
        if (v == "vertical") {
            return JonesState::vertical();
        }
        fail(path, "unknown polarization '" + v.get<std::string>() + "' (expected horizontal, vertical, "
                                                                     "{\"linear\": azimuth} or [ex, ey])");
    }
    if (v.is_object() && v.size() == 1 && v.contains("linear")) {
        return JonesState::linear(as_number(v["linear"], path + "/linear"));
    }
    if (v.is_array() && v.size() == 2) {
        return {complex_from_json(v[0], path + "/0"), complex_from_json(v[1], path + "/1")};
    }
    fail(path, "expected a polarization state");
}

}  // namespace

JonesOperator jones_from_json(const json &spec, const std::string &path) {
    if (spec.is_string()) {
        if (spec == "identity") {
            return {};
        }
        fail(path, "unknown Jones operator '" + spec.get<std::string>() + "'");
    }
    if (!spec.is_object() || spec.size() != 1) {
        fail(path, "a Jones operator is \"identity\" or an object with exactly one of rotation, retarder, pc, "
                   "pdl, random_unitary, phase, matrix");
    }
    const std::string key = spec.begin().key();
    const json &value = spec.begin().value();
    const std::string p = path + "/" + key;
    if (key == "rotation") {
        return JonesOperator::rotation(as_number(value, p));
    }
    if (key == "phase") {
        return JonesOperator{}.scaled(std::polar(1.0, as_number(value, p)));
    }
    if (key == "random_unitary") {
        if (!value.is_number_integer()) {
            fail(p, "expected an integer seed");
        }
        return JonesOperator::random_unitary(value.get<uint64_t>());
    }
    if (key == "pc") {
        if (!value.is_array() || value.size() != 3) {
            fail(p, "expected [quarter_in, half, quarter_out]");
        }
        return pc_matrix({as_number(value[0], p + "/0"), as_number(value[1], p + "/1"), as_number(value[2], p + "/2")});
    }
    if (key == "retarder") {
        json echo;
        Reader r(value, p, echo);
        double az = r.number("azimuth", 0.0);
        double ret = r.number("retardance", 0.0);
        r.finish();
        return JonesOperator::retarder(az, ret);
    }
    if (key == "pdl") {
        json echo;
        Reader r(value, p, echo);
        double az = r.number("azimuth", 0.0);
        double tmax = r.number("t_max", 1.0);
        double tmin = r.number("t_min", 1.0);
        r.finish();
        JonesOperator out;
        validated(p, [&] { out = JonesOperator::diattenuator(az, tmax, tmin); });
        return out;
    }
    if (key == "matrix") {
        if (!value.is_array() || value.size() != 2 || !value[0].is_array() || value[0].size() != 2 ||
            !value[1].is_array() || value[1].size() != 2) {
            fail(p, "expected a 2x2 array of [re, im] entries");
        }
        return {complex_from_json(value[0][0], p + "/0/0"), complex_from_json(value[0][1], p + "/0/1"),
                complex_from_json(value[1][0], p + "/1/0"), complex_from_json(value[1][1], p + "/1/1")};
    }
    fail(p, "unknown Jones operator form '" + key + "'");
}

namespace {

const json kIdentity = "identity";

JonesOperator jones_field(Reader &r, const std::string &key) {
    return jones_from_json(r.raw(key, kIdentity), r.at(key));
}

LoopConfig read_geometry(const json &node, const std::string &path, json &out, bool ideal_defaults, double &group_index) {
    Reader r(node, path, out);
    TwoPartyGeometry g;
    g.lower_link_m = r.number("lower_link_m", g.lower_link_m);
    g.upper_link_m = r.number("upper_link_m", g.upper_link_m);
    g.delay_m = r.number("delay_m", g.delay_m);
    g.loss_db_per_km = r.number("loss_db_per_km", ideal_defaults ? 0.0 : kDefaultFiberLossDbPerKm);
    g.attenuator_transmittance = r.number("attenuator_transmittance", 1.0);
    g.misalignment_rad = r.number("misalignment_rad", 0.0);
    g.coupler_ratio = r.number("coupler_ratio", 0.5);
    group_index = r.number("group_index", kDefaultGroupIndex);
    g.pcc = jones_field(r, "pcc");
    g.pcb = jones_field(r, "pcb");
    g.pca = jones_field(r, "pca");
    g.lower_link_jones = jones_field(r, "lower_link_jones");
    g.upper_link_jones = jones_field(r, "upper_link_jones");
    g.delay_jones = jones_field(r, "delay_jones");
    JonesState pol = state_from_json(r.raw("source_pol", "horizontal"), r.at("source_pol"));
    r.finish();
    LoopConfig config;
    validated(path, [&] {
        config = build_two_party_loop(g);
        config.source_pol = pol;
    });
    return config;
}

Component read_component(const json &node, const std::string &path, json &out) {
    Reader r(node, path, out);
    std::string kind_name = r.string("kind", "");
    Component c;
    validated(r.at("kind"), [&] { c.kind = component_kind_from_string(kind_name); });
    c.label = r.string("label", "");
    switch (c.kind) {
        case ComponentKind::fiber:
        case ComponentKind::delay_fiber:
            if (!r.has("length_m")) {
                fail(r.at("length_m"), "fiber components need length_m");
            }
            c.length_m = r.number("length_m", 0.0);
            c.loss_db_per_km = r.number("loss_db_per_km", kDefaultFiberLossDbPerKm);
            c.jones = jones_field(r, "jones");
            break;
        case ComponentKind::phase_modulator:
            validated(r.at("owner"), [&] { c.owner = owner_from_string(r.string("owner", "")); });
            c.jones = jones_field(r, "jones");
            break;
        case ComponentKind::pol_controller:
        case ComponentKind::pdl_element:
            c.jones = jones_field(r, "jones");
            break;
        case ComponentKind::attenuator:
            c.transmittance = r.number("transmittance", 1.0);
            break;
    }
    r.finish();
    return c;
}

LoopConfig read_components(const json &node, const std::string &path, json &out, double &group_index) {
    Reader r(node, path, out);
    const json *list = r.child("components");
    if (!list->is_array()) {
        fail(r.at("components"), "expected an array of components");
    }
    LoopConfig config;
    json &echo = r.out("components");
    echo = json::array();
    for (size_t k = 0; k < list->size(); k++) {
        json item;
        config.components.push_back(read_component((*list)[k], r.at("components") + "/" + std::to_string(k), item));
        echo.push_back(item);
    }
    config.coupler_ratio = r.number("coupler_ratio", 0.5);
    group_index = r.number("group_index", kDefaultGroupIndex);
    config.source_pol = state_from_json(r.raw("source_pol", "horizontal"), r.at("source_pol"));
    r.finish();
    validated(path, [&] { config.validate(); });
    return config;
}

RingConfig read_ring(const json &node, const std::string &path, json &out, double &group_index) {
    Reader r(node, path, out);
    RingConfig ring;
    ring.hub.coupler_ratio = r.number("coupler_ratio", 0.5);
    ring.hub.delay_m = r.number("delay_m", ring.hub.delay_m);
    ring.hub.pcc = jones_field(r, "pcc");
    ring.hub.pcb = jones_field(r, "pcb");
    ring.hub.pmb_jones = jones_field(r, "pmb_jones");
    ring.hub.source_pol = state_from_json(r.raw("source_pol", "horizontal"), r.at("source_pol"));
    ring.closing_link_m = r.number("closing_link_m", ring.closing_link_m);
    ring.loss_db_per_km = r.number("loss_db_per_km", kDefaultFiberLossDbPerKm);
    group_index = r.number("group_index", kDefaultGroupIndex);

    const json *list = r.child("entities");
    if (!list || !list->is_array() || list->empty()) {
        fail(r.at("entities"), "a ring needs a non-empty entities array");
    }
    json &echo = r.out("entities");
    echo = json::array();
    for (size_t k = 0; k < list->size(); k++) {
        json item;
        Reader e((*list)[k], r.at("entities") + "/" + std::to_string(k), item);
        Entity entity;
        entity.id = e.string("id", "");
        entity.link_in_m = e.number("link_in_m", entity.link_in_m);
        entity.selected = e.boolean("selected", false);
        entity.module.pc = jones_field(e, "pc");
        entity.module.pm_jones = jones_field(e, "pm_jones");
        entity.module.attenuator_transmittance = e.number("attenuator_transmittance", 1.0);
        entity.module.insertion_transmittance = e.number("insertion_transmittance", 1.0);
        entity.disturbance.sigma = e.number("sigma", 0.0);
        entity.disturbance.uniform = e.boolean("uniform_disturbance", false);
        e.finish();
        ring.entities.push_back(entity);
        echo.push_back(item);
    }
    r.finish();
    validated(path, [&] { ring.validate(); });
    return ring;
}

std::pair<size_t, size_t> line_column(std::string_view text, size_t byte) {
    size_t line = 1, col = 1;
    for (size_t k = 0; k < std::min(byte, text.size()); k++) {
        if (text[k] == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
    }
    return {line, col};
}

}  // namespace

std::string fnv1a64_hex(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string Scenario::digest() const {
    return fnv1a64_hex(effective.dump());
}

LoopConfig Scenario::loop_for(std::string_view partner) const {
    if (const auto *two = std::get_if<LoopConfig>(&loop)) {
        return *two;
    }
    const auto &ring = std::get<RingConfig>(loop);
    std::string_view id = partner.empty() ? std::string_view(protocol.partner) : partner;
    if (id.empty()) {
        throw std::invalid_argument("ring scenario needs a partner (protocol.partner or --partner)");
    }
    return select_partner(ring, id);
}

std::vector<Disturbance> Scenario::disturbances_for(std::string_view partner) const {
    if (!is_ring()) {
        return {};
    }
    std::string_view id = partner.empty() ? std::string_view(protocol.partner) : partner;
    if (id.empty()) {
        throw std::invalid_argument("ring scenario needs a partner (protocol.partner or --partner)");
    }
    return bystander_disturbances(std::get<RingConfig>(loop), id);
}

Scenario scenario_from_json(const json &doc, std::string_view origin) {
    try {
        Scenario s;
        json &eff = s.effective;
        Reader top(doc, "", eff);
        s.name = top.string("name", "scenario");
        s.seed = top.count("seed", 1);

        {
            const json *node = top.child("source");
            Reader r(node ? *node : empty_object(), "/source", eff["source"]);
            s.source.mu = r.number("mu", s.source.mu);
            s.source.rep_rate_hz = r.number("rep_rate_hz", s.source.rep_rate_hz);
            s.source.wavelength_m = r.number("wavelength_m", s.source.wavelength_m);
            r.finish();
            validated("/source", [&] { s.source.validate(); });
        }
        {
            const json *node = top.child("detectors");
            Reader r(node ? *node : empty_object(), "/detectors", eff["detectors"]);
            s.detectors.efficiency = r.number("efficiency", s.detectors.efficiency);
            s.detectors.dark_prob = r.number("dark_prob", s.detectors.dark_prob);
            validated(r.at("double_click_policy"), [&] {
                s.detectors.double_click_policy =
                    double_click_policy_from_string(r.string("double_click_policy", "discard"));
            });
            s.detectors.apd1_bit = static_cast<int>(r.count("apd1_bit", 0));
            r.finish();
            validated("/detectors", [&] { s.detectors.validate(); });
        }
        {
            const json *node = top.child("protocol");
            Reader r(node ? *node : empty_object(), "/protocol", eff["protocol"]);
            s.protocol.pulses = r.count("pulses", s.protocol.pulses);
            s.protocol.disclosed_fraction = r.number("disclosed_fraction", 1.0);
            s.protocol.disturbance_threshold = r.number("disturbance_threshold", kDefaultDisturbanceThreshold);
            s.protocol.partner = r.string("partner", "");
            r.finish();
            if (s.protocol.pulses < 1) {
                fail("/protocol/pulses", "pulses must be >= 1");
            }
            if (!(s.protocol.disclosed_fraction > 0 && s.protocol.disclosed_fraction <= 1)) {
                fail("/protocol/disclosed_fraction", "disclosed_fraction must lie in (0, 1]");
            }
            if (!(s.protocol.disturbance_threshold >= 0 && s.protocol.disturbance_threshold <= 1)) {
                fail("/protocol/disturbance_threshold", "disturbance_threshold must lie in [0, 1]");
            }
        }
        {
            const json *node = top.child("eve");
            Reader r(node ? *node : empty_object(), "/eve", eff["eve"]);
            validated(r.at("strategy"),
                      [&] { s.eve.strategy = eve_strategy_from_string(r.string("strategy", "off")); });
            s.eve.fraction = r.number("fraction", 0.0);
            r.finish();
            validated("/eve", [&] { s.eve.validate(); });
        }
        {
            const json *node = top.child("loop");
            json &out = eff["loop"];
            if (!node) {
                // No loop given: ideal lossless two-party loop with default lengths.
                out = json::object();
                s.loop = read_geometry(json::object(), "/loop/geometry", out["geometry"], true, s.group_index);
            } else {
                if (node->is_object() && node->contains("components")) {
                    s.loop = read_components(*node, "/loop", out, s.group_index);
                } else {
                    if (!node->is_object() || node->size() != 1) {
                        fail("/loop", "expected exactly one of geometry, components, ring");
                    }
                    Reader r(*node, "/loop", out);
                    if (const json *g = r.child("geometry")) {
                        s.loop = read_geometry(*g, "/loop/geometry", r.out("geometry"), false, s.group_index);
                    } else if (const json *ring = r.child("ring")) {
                        s.loop = read_ring(*ring, "/loop/ring", r.out("ring"), s.group_index);
                    } else {
                        r.finish();
                    }
                }
            }
            if (!(s.group_index > 1)) {
                fail("/loop", "group_index must be > 1");
            }
        }
        top.finish();

        if (s.is_ring()) {
            const auto &ring = std::get<RingConfig>(s.loop);
            if (s.protocol.partner.empty()) {
                for (const auto &e : ring.entities) {
                    if (e.selected) {
                        s.protocol.partner = e.id;
                        eff["protocol"]["partner"] = e.id;
                    }
                }
            }
            if (!s.protocol.partner.empty()) {
                validated("/protocol/partner", [&] { ring.entity(s.protocol.partner); });
            }
        } else if (!s.protocol.partner.empty()) {
            fail("/protocol/partner", "partner is only meaningful for ring scenarios");
        }
        return s;
    } catch (const ScenarioError &e) {
        throw ScenarioError(std::string(origin) + ": " + e.what());
    }
}

Scenario parse_scenario(std::string_view text, std::string_view origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string what = e.what();
        // Drop nlohmann's "[json.exception.parse_error.101] parse error at line x, column y: " prefix.
        auto colon = what.find(": ");
        std::string detail = colon == std::string::npos ? what : what.substr(colon + 2);
        throw ScenarioError(std::string(origin) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                            ": syntax error: " + detail);
    }
    return scenario_from_json(doc, origin);
}

Scenario load_scenario(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ScenarioError(path.string() + ": cannot open scenario file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

}  // namespace circqkd
