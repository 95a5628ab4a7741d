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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "circqkd/harness.hpp"
#include "circqkd/loopmodel.hpp"
#include "circqkd/scenario.hpp"

namespace py = pybind11;
using namespace circqkd;

namespace {

py::dict stats_dict(const SessionStats &s) {
    py::dict d;
    d["pulses"] = s.pulses_sent;
    d["raw_clicks"] = s.raw_clicks;
    d["double_clicks"] = s.double_clicks;
    d["d1_clicks"] = s.d1_clicks;
    d["d2_clicks"] = s.d2_clicks;
    d["sifted_bits"] = s.sifted_bits;
    d["errors"] = s.errors;
    d["disclosed_bits"] = s.disclosed_bits;
    d["disclosed_errors"] = s.disclosed_errors;
    d["raw_rate_hz"] = s.raw_rate_hz;
    d["qber"] = s.qber_defined ? py::object(py::float_(s.qber)) : py::object(py::none());
    d["qber_lo"] = s.qber_lo;
    d["qber_hi"] = s.qber_hi;
    return d;
}

py::dict expected_dict(const ExpectedSession &e) {
    py::dict d;
    d["p_single_click"] = e.p_single_click;
    d["p_sifted"] = e.p_sifted;
    d["p_error"] = e.p_error;
    d["raw_rate_hz"] = e.raw_rate_hz;
    d["qber"] = e.qber;
    return d;
}

RunOptions options(std::optional<uint64_t> seed, std::optional<uint64_t> pulses, std::optional<std::string> partner,
                   unsigned threads) {
    RunOptions o;
    o.seed = seed;
    o.pulses = pulses;
    o.partner = partner;
    o.threads = threads;
    return o;
}

py::dict report_dict(const RunReport &r) {
    py::dict d;
    d["scenario"] = r.scenario_name;
    d["digest"] = r.digest;
    d["seed"] = r.seed;
    d["axis"] = r.axis;
    py::list rows;
    for (const auto &row : r.rows) {
        py::dict x = stats_dict(row.stats);
        x["label"] = row.label;
        x["value"] = row.value ? py::object(py::float_(*row.value)) : py::object(py::none());
        x["expected"] = expected_dict(row.expected);
        rows.append(x);
    }
    d["rows"] = rows;
    std::ostringstream csv;
    write_stats_csv(csv, r);
    d["csv"] = csv.str();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sagnac-loop BB84 simulator";
    m.attr("CSV_SCHEMA") = kCsvSchema;
    m.attr("SEED_POLICY") = kSeedPolicy;

    py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("name", &Scenario::name)
        .def_readonly("seed", &Scenario::seed)
        .def_property_readonly("is_ring", &Scenario::is_ring)
        .def_property_readonly("digest", &Scenario::digest)
        .def_property_readonly("effective_json", [](const Scenario &s) { return s.effective.dump(); })
        .def("visibility", [](const Scenario &s, const std::string &partner) { return LoopResponse::of(s.loop_for(partner)).visibility(); },
             py::arg("partner") = "");

    m.def("load_scenario", [](const std::string &path) { return load_scenario(path); }, py::arg("path"));
    m.def("parse_scenario", [](const std::string &text) { return parse_scenario(text); }, py::arg("text"));

    m.def("expected", [](const Scenario &s) { return expected_dict(expected(s)); }, py::arg("scenario"));

    m.def(
        "run",
        [](const Scenario &s, std::optional<uint64_t> seed, std::optional<uint64_t> pulses,
           std::optional<std::string> partner, unsigned threads) {
            RunReport r;
            {
                py::gil_scoped_release nogil;
                r = run(s, options(seed, pulses, partner, threads));
            }
            return report_dict(r);
        },
        py::arg("scenario"), py::kw_only(), py::arg("seed") = py::none(), py::arg("pulses") = py::none(),
        py::arg("partner") = py::none(), py::arg("threads") = 0);

    m.def(
        "sweep",
        [](const Scenario &s, const std::string &axis, const std::string &grid, std::optional<uint64_t> seed,
           std::optional<uint64_t> pulses, unsigned threads) {
            RunReport r;
            auto values = parse_grid(grid);
            {
                py::gil_scoped_release nogil;
                r = sweep(s, axis, values, options(seed, pulses, std::nullopt, threads));
            }
            return report_dict(r);
        },
        py::arg("scenario"), py::arg("axis"), py::arg("grid"), py::kw_only(), py::arg("seed") = py::none(),
        py::arg("pulses") = py::none(), py::arg("threads") = 0);
    m.def("sweep_axes", &sweep_axes);

    m.def(
        "calibrate",
        [](const Scenario &s, double target_raw, double target_qber, const std::string &free) {
            auto [rk, qk] = parse_free_parameters(free);
            auto c = calibrate(s, {target_raw, target_qber}, rk, qk);
            py::dict d;
            d["fitted"] = c.fitted;
            d["rate_value"] = c.rate_value;
            d["qber_value"] = c.qber_value;
            d["visibility"] = c.visibility;
            d["iterations"] = c.iterations;
            d["expected"] = expected_dict(c.expected);
            return d;
        },
        py::arg("scenario"), py::arg("target_raw") = 1200.0, py::arg("target_qber") = 0.054,
        py::arg("free") = "transmittance,visibility");

    m.def(
        "fringe",
        [](const Scenario &s, int points, const std::string &partner) {
            py::list out;
            for (const auto &p : fringe(s, points, partner)) {
                out.append(py::make_tuple(p.delta_phi, p.probs.p1, p.probs.p2));
            }
            return out;
        },
        py::arg("scenario"), py::arg("points") = 360, py::arg("partner") = "");

    m.def(
        "detection_probs",
        [](const Scenario &s, double phi_a, double phi_b, const std::string &partner) {
            auto p = detection_probs(s.loop_for(partner), PhasePair(phi_a, phi_b));
            return py::make_tuple(p.p1, p.p2);
        },
        py::arg("scenario"), py::arg("phi_a"), py::arg("phi_b"), py::arg("partner") = "");

    m.def("wilson_interval", &wilson_interval, py::arg("successes"), py::arg("trials"));
}
