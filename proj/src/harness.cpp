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

#include "circqkd/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace circqkd {

using nlohmann::json;
using std::numbers::pi;

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string origin_of(const Scenario &s) {
    return s.name;
}

json &loop_section(json &doc, const char *what) {
    json &loop = doc["loop"];
    if (loop.contains("geometry")) {
        return loop["geometry"];
    }
    if (loop.contains("ring")) {
        return loop["ring"];
    }
    throw std::invalid_argument(std::string(what) + " needs a geometry or ring loop; explicit component lists "
                                                    "are not parameterized");
}

}  // namespace

Scenario with_overrides(const Scenario &scenario, const RunOptions &options) {
    if (!options.seed && !options.pulses && !options.partner) {
        return scenario;
    }
    json doc = scenario.effective;
    if (options.seed) {
        doc["seed"] = *options.seed;
    }
    if (options.pulses) {
        doc["protocol"]["pulses"] = *options.pulses;
    }
    if (options.partner) {
        if (!scenario.is_ring()) {
            throw std::invalid_argument("--partner needs a ring scenario");
        }
        doc["protocol"]["partner"] = *options.partner;
        for (auto &e : doc["loop"]["ring"]["entities"]) {
            e["selected"] = false;
        }
    }
    return scenario_from_json(doc, origin_of(scenario));
}

ExpectedSession expected(const Scenario &scenario) {
    auto loop = LoopResponse::of(scenario.loop_for());
    auto cases = phase_cases(scenario.eve);
    auto disturbances = scenario.disturbances_for();
    return expected_session(loop, cases, scenario.source, scenario.detectors, combined_noise(disturbances));
}

namespace {

SessionSetup setup_for(const Scenario &s, const RunOptions &options) {
    SessionSetup setup;
    setup.loop = LoopResponse::of(s.loop_for());
    setup.disturbances = s.disturbances_for();
    setup.source = s.source;
    setup.detectors = s.detectors;
    setup.eve = s.eve;
    setup.pulses = s.protocol.pulses;
    setup.seed = s.seed;
    setup.disclosed_fraction = s.protocol.disclosed_fraction;
    setup.keep_transcript = options.keep_transcript;
    setup.threads = options.threads;
    return setup;
}

}  // namespace

RunReport run(const Scenario &base, const RunOptions &options) {
    auto start = std::chrono::steady_clock::now();
    Scenario s = with_overrides(base, options);
    RunReport report;
    report.scenario_name = s.name;
    report.digest = s.digest();
    report.seed = s.seed;

    auto result = run_session(setup_for(s, options));
    report.rows.push_back({"run", std::nullopt, result.stats, expected(s)});
    report.transcript = std::move(result.transcript);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::pair<RateKnob, QberKnob> parse_free_parameters(const std::string &spec) {
    std::optional<RateKnob> rate;
    std::optional<QberKnob> qber;
    std::stringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item == "transmittance") {
            rate = RateKnob::transmittance;
        } else if (item == "efficiency") {
            rate = RateKnob::efficiency;
        } else if (item == "visibility") {
            qber = QberKnob::visibility;
        } else if (item == "dark_prob") {
            qber = QberKnob::dark_prob;
        } else {
            throw std::invalid_argument("unknown free parameter '" + item +
                                        "' (expected transmittance|efficiency and visibility|dark_prob)");
        }
    }
    if (!rate || !qber) {
        throw std::invalid_argument("free parameters need one of transmittance|efficiency and one of "
                                    "visibility|dark_prob");
    }
    return {*rate, *qber};
}

namespace {

void set_rate_knob(json &doc, RateKnob knob, double v) {
    if (knob == RateKnob::efficiency) {
        doc["detectors"]["efficiency"] = v;
        return;
    }
    json &loop = doc["loop"];
    if (loop.contains("geometry")) {
        loop["geometry"]["attenuator_transmittance"] = v;
        return;
    }
    if (loop.contains("components")) {
        for (auto &c : loop["components"]) {
            if (c["kind"] == "attenuator") {
                c["transmittance"] = v;
                return;
            }
        }
    }
    throw std::invalid_argument("calibrating transmittance needs a two-party loop with an attenuator");
}

void set_qber_knob(json &doc, QberKnob knob, double v) {
    if (knob == QberKnob::dark_prob) {
        doc["detectors"]["dark_prob"] = v;
        return;
    }
    if (!doc["loop"].contains("geometry")) {
        throw std::invalid_argument("calibrating visibility needs a geometry loop (it sets misalignment_rad)");
    }
    doc["loop"]["geometry"]["misalignment_rad"] = v;
}

struct Range {
    double lo, hi;
};

Range rate_range(RateKnob) {
    return {1e-9, 1.0};
}

Range qber_range(QberKnob knob) {
    return knob == QberKnob::visibility ? Range{0.0, pi / 4} : Range{0.0, 0.5};
}

// Solves f(x) = target on [lo, hi] for monotone f.
double bisect(const std::function<double(double)> &f, Range r, double target, const char *what,
              const char *units) {
    double f_lo = f(r.lo), f_hi = f(r.hi);
    double lo_v = std::min(f_lo, f_hi), hi_v = std::max(f_lo, f_hi);
    if (target < lo_v - 1e-15 || target > hi_v + 1e-15) {
        throw std::invalid_argument(std::string("infeasible calibration target: ") + what + " " + fmt(target) +
                                    units + " is outside the achievable range [" + fmt(lo_v) + ", " + fmt(hi_v) +
                                    "]" + units);
    }
    if (f_lo == target) {
        return r.lo;
    }
    if (f_hi == target) {
        return r.hi;
    }
    const bool increasing = f_hi > f_lo;
    double lo = r.lo, hi = r.hi;
    for (int k = 0; k < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); k++) {
        double mid = 0.5 * (lo + hi);
        double v = f(mid);
        if ((v < target) == increasing) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

bool close_enough(double value, double target) {
    return std::abs(value - target) <= 1e-6 * std::abs(target) || (target == 0 && value == 0);
}

}  // namespace

CalibrationResult calibrate(const Scenario &scenario, const CalibrationTargets &targets, RateKnob rate_knob,
                            QberKnob qber_knob) {
    if (scenario.is_ring()) {
        throw std::invalid_argument("calibration works on two-party scenarios");
    }
    if (!(targets.raw_rate_hz > 0) || !(targets.qber >= 0 && targets.qber < 0.5)) {
        throw std::invalid_argument("calibration targets need raw_rate_hz > 0 and qber in [0, 0.5)");
    }
    json doc = scenario.effective;
    auto evaluate = [&](double rate_v, double qber_v) {
        json d = doc;
        set_rate_knob(d, rate_knob, rate_v);
        set_qber_knob(d, qber_knob, qber_v);
        return expected(scenario_from_json(d, origin_of(scenario)));
    };

    double rate_v = rate_range(rate_knob).hi;
    double qber_v = qber_range(qber_knob).lo;
    CalibrationResult out;
    out.fitted = scenario;
    for (out.iterations = 1; out.iterations <= 100; out.iterations++) {
        rate_v = bisect([&](double x) { return evaluate(x, qber_v).raw_rate_hz; }, rate_range(rate_knob),
                        targets.raw_rate_hz, "raw rate", " Hz");
        qber_v = bisect([&](double x) { return evaluate(rate_v, x).qber; }, qber_range(qber_knob), targets.qber,
                        "QBER", "");
        auto e = evaluate(rate_v, qber_v);
        if (close_enough(e.raw_rate_hz, targets.raw_rate_hz) && close_enough(e.qber, targets.qber)) {
            break;
        }
    }
    if (out.iterations > 100) {
        throw std::runtime_error("calibration did not converge in 100 alternations");
    }

    set_rate_knob(doc, rate_knob, rate_v);
    set_qber_knob(doc, qber_knob, qber_v);
    out.fitted = scenario_from_json(doc, origin_of(scenario));
    out.rate_knob = rate_knob;
    out.qber_knob = qber_knob;
    out.rate_value = rate_v;
    out.qber_value = qber_v;
    out.expected = expected(out.fitted);
    out.visibility = LoopResponse::of(out.fitted.loop_for()).visibility();
    return out;
}

std::vector<std::string> sweep_axes() {
    return {"mu",      "rep_rate_hz",   "efficiency",         "dark_prob",
            "eve_fraction", "disclosed_fraction", "link_m",  "delay_m",
            "loss_db_per_km", "attenuator_transmittance", "misalignment_rad", "coupler_ratio",
            "delta_phi"};
}

std::vector<double> parse_grid(const std::string &spec) {
    std::vector<double> out;
    auto number = [&](const std::string &text) {
        size_t used = 0;
        double v;
        try {
            v = std::stod(text, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used != text.size() || text.empty()) {
            throw std::invalid_argument("bad grid value '" + text + "' in '" + spec + "'");
        }
        return v;
    };
    if (spec.find(':') != std::string::npos) {
        std::stringstream in(spec);
        std::string a, b, n;
        std::getline(in, a, ':');
        std::getline(in, b, ':');
        std::getline(in, n, ':');
        double start = number(a), stop = number(b), count = number(n);
        if (!(count >= 1) || count != std::floor(count)) {
            throw std::invalid_argument("grid count must be a positive integer in '" + spec + "'");
        }
        int m = static_cast<int>(count);
        for (int k = 0; k < m; k++) {
            out.push_back(m == 1 ? start : start + (stop - start) * k / (m - 1));
        }
        return out;
    }
    std::stringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        out.push_back(number(item));
    }
    if (out.empty()) {
        throw std::invalid_argument("empty grid");
    }
    return out;
}

namespace {

void set_axis(json &doc, const std::string &axis, double v) {
    if (axis == "mu" || axis == "rep_rate_hz") {
        doc["source"][axis] = v;
    } else if (axis == "efficiency" || axis == "dark_prob") {
        doc["detectors"][axis] = v;
    } else if (axis == "eve_fraction") {
        doc["eve"]["strategy"] = "intercept_resend";
        doc["eve"]["fraction"] = v;
    } else if (axis == "disclosed_fraction") {
        doc["protocol"][axis] = v;
    } else if (axis == "link_m") {
        json &loop = loop_section(doc, "axis link_m");
        if (loop.contains("entities")) {
            for (auto &e : loop["entities"]) {
                e["link_in_m"] = v;
            }
            loop["closing_link_m"] = v;
        } else {
            loop["lower_link_m"] = v;
            loop["upper_link_m"] = v;
        }
    } else if (axis == "delay_m" || axis == "loss_db_per_km" || axis == "coupler_ratio") {
        loop_section(doc, ("axis " + axis).c_str())[axis] = v;
    } else if (axis == "attenuator_transmittance" || axis == "misalignment_rad") {
        if (!doc["loop"].contains("geometry")) {
            throw std::invalid_argument("axis " + axis + " needs a geometry loop");
        }
        doc["loop"]["geometry"][axis] = v;
    } else {
        std::string known;
        for (const auto &a : sweep_axes()) {
            known += (known.empty() ? "" : ", ") + a;
        }
        throw std::invalid_argument("unknown sweep axis '" + axis + "' (sweepable: " + known + ")");
    }
}

}  // namespace

RunReport sweep(const Scenario &base, const std::string &axis, const std::vector<double> &grid,
                const RunOptions &options) {
    auto start = std::chrono::steady_clock::now();
    Scenario s = with_overrides(base, options);
    RunReport report;
    report.scenario_name = s.name;
    report.digest = s.digest();
    report.seed = s.seed;
    report.axis = axis;
    if (grid.empty()) {
        throw std::invalid_argument("sweep grid is empty");
    }
    if (axis == "delta_phi") {
        auto loop = LoopResponse::of(s.loop_for());
        for (double v : grid) {
            SessionSetup setup = setup_for(s, options);
            setup.fixed_phases = PhasePair(v, 0.0);
            setup.eve = {};
            setup.keep_transcript = false;
            auto result = run_session(setup);
            PhaseCase only{1.0, v, false, 0};
            auto e = expected_session(loop, std::span(&only, 1), s.source, s.detectors,
                                      combined_noise(setup.disturbances));
            report.rows.push_back({axis, v, result.stats, e});
        }
    } else {
        for (double v : grid) {
            json doc = s.effective;
            set_axis(doc, axis, v);
            Scenario point = scenario_from_json(doc, origin_of(s));
            RunOptions o = options;
            o.keep_transcript = false;
            auto result = run_session(setup_for(point, o));
            report.rows.push_back({axis, v, result.stats, expected(point)});
        }
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<FringePoint> fringe(const Scenario &scenario, int points, const std::string &partner) {
    if (points < 1) {
        throw std::invalid_argument("fringe needs at least one point");
    }
    auto config = scenario.loop_for(partner);
    auto loop = LoopResponse::of(config);
    std::vector<FringePoint> out;
    for (int k = 0; k < points; k++) {
        double d = 2 * pi * k / points;
        auto p = detection_probs(config, PhasePair(d, 0.0));
        out.push_back({d, p, click_probabilities(p.p1, p.p2, scenario.source, scenario.detectors)});
    }
    (void)loop;
    return out;
}

void write_stats_csv(std::ostream &out, const RunReport &r) {
    out << "# " << kCsvSchema << " scenario=" << r.scenario_name << " digest=" << r.digest << " seed=" << r.seed
        << "\n";
    out << "# seed_policy: " << r.seed_policy << "\n";
    out << "label,value,pulses,raw_clicks,double_clicks,d1_clicks,d2_clicks,sifted_bits,disclosed_bits,errors,"
           "raw_rate_hz,qber,qber_lo,qber_hi,expected_raw_rate_hz,expected_qber\n";
    for (const auto &row : r.rows) {
        const auto &s = row.stats;
        out << row.label << "," << (row.value ? fmt(*row.value) : "") << "," << s.pulses_sent << "," << s.raw_clicks
            << "," << s.double_clicks << "," << s.d1_clicks << "," << s.d2_clicks << "," << s.sifted_bits << ","
            << s.disclosed_bits << "," << s.errors << "," << fmt(s.raw_rate_hz) << ","
            << fmt(s.qber_defined ? s.qber : NAN) << "," << fmt(s.qber_lo) << "," << fmt(s.qber_hi) << ","
            << fmt(row.expected.raw_rate_hz) << "," << fmt(row.expected.qber) << "\n";
    }
}

void write_fringe_csv(std::ostream &out, const std::vector<FringePoint> &points) {
    out << "# circqkd.fringe.v1\n";
    out << "delta_phi,p1,p2,q_none,q_d1_only,q_d2_only,q_both\n";
    for (const auto &p : points) {
        out << fmt(p.delta_phi) << "," << fmt(p.probs.p1) << "," << fmt(p.probs.p2) << "," << fmt(p.clicks.none)
            << "," << fmt(p.clicks.d1_only) << "," << fmt(p.clicks.d2_only) << "," << fmt(p.clicks.both) << "\n";
    }
}

void write_transcript_csv(std::ostream &out, const std::vector<PulseRecord> &records) {
    out << "# circqkd.transcript.v1\n";
    out << "index,alice_bit,alice_basis,bob_basis,phi_a,phi_b,outcome,double_click,sifted,decoded_bit,disclosed,"
           "eve_attacked\n";
    for (const auto &r : records) {
        out << r.index << "," << r.alice_bit << "," << r.alice_basis << "," << r.bob_basis << "," << fmt(r.phi_a)
            << "," << fmt(r.phi_b) << "," << to_string(r.outcome) << "," << r.double_click << "," << r.sifted << ","
            << (r.decoded_bit ? std::to_string(*r.decoded_bit) : "") << "," << r.disclosed << "," << r.eve_attacked
            << "\n";
    }
}

void write_summary(std::ostream &out, const RunReport &r) {
    out << "scenario     " << r.scenario_name << " (digest " << r.digest << ", seed " << r.seed << ")\n";
    for (const auto &row : r.rows) {
        const auto &s = row.stats;
        if (row.value) {
            out << r.axis << " = " << fmt(*row.value) << ": ";
        }
        out << "pulses " << s.pulses_sent << ", sifted " << s.sifted_bits << ", raw rate " << fmt(s.raw_rate_hz)
            << " Hz (expected " << fmt(row.expected.raw_rate_hz) << "), QBER "
            << (s.qber_defined ? fmt(s.qber) : "undefined") << " [" << fmt(s.qber_lo) << ", " << fmt(s.qber_hi)
            << "] (expected " << fmt(row.expected.qber) << ")\n";
    }
    out << "wall clock   " << fmt(r.wall_seconds) << " s\n";
}

}  // namespace circqkd
