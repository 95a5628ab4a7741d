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

#include <fstream>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "circqkd/harness.hpp"

using namespace circqkd;

namespace {

struct Common {
    std::string scenario;
    std::optional<uint64_t> seed;
    std::optional<uint64_t> pulses;
    std::string out;
    std::string transcript;
    unsigned threads = 0;
};

void add_common(CLI::App *cmd, Common &c, bool monte_carlo = true) {
    cmd->add_option("scenario", c.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out,-o", c.out, "Write CSV here instead of stdout");
    if (monte_carlo) {
        cmd->add_option("--seed", c.seed, "Override the scenario seed");
        cmd->add_option("--pulses", c.pulses, "Override the pulse count");
        cmd->add_option("--threads", c.threads, "Worker threads (0 = hardware)");
    }
}

RunOptions options_of(const Common &c) {
    RunOptions o;
    o.seed = c.seed;
    o.pulses = c.pulses;
    o.threads = c.threads;
    o.keep_transcript = !c.transcript.empty();
    return o;
}

template <typename F>
void emit(const std::string &path, F &&write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot write " + path);
    }
    write(f);
}

void report(const Common &c, const RunReport &r) {
    emit(c.out, [&](std::ostream &o) { write_stats_csv(o, r); });
    if (!c.transcript.empty()) {
        emit(c.transcript, [&](std::ostream &o) { write_transcript_csv(o, r.transcript); });
    }
    write_summary(std::cerr, r);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"circqkd: Sagnac-loop phase-coded BB84 simulator"};
    app.require_subcommand(1);

    Common run_args;
    auto *run_cmd = app.add_subcommand("run", "Monte Carlo session for a scenario");
    add_common(run_cmd, run_args);
    run_cmd->add_option("--transcript", run_args.transcript, "Write the per-pulse transcript CSV here");

    Common net_args;
    std::string partner;
    auto *net_cmd = app.add_subcommand("net-run", "Session with one ring entity as Alice");
    add_common(net_cmd, net_args);
    net_cmd->add_option("--partner", partner, "Entity id to key with")->required();
    net_cmd->add_option("--transcript", net_args.transcript, "Write the per-pulse transcript CSV here");

    Common sweep_args;
    std::string axis, grid;
    auto *sweep_cmd = app.add_subcommand("sweep", "One session per grid value of one parameter");
    add_common(sweep_cmd, sweep_args);
    sweep_cmd->add_option("--axis", axis, "Parameter to sweep")->required();
    sweep_cmd->add_option("--grid", grid, "start:stop:count or v1,v2,...")->required();

    Common cal_args;
    CalibrationTargets targets;
    std::string free_params = "transmittance,visibility";
    std::string fitted_name;
    auto *cal_cmd = app.add_subcommand("calibrate", "Fit two free parameters to a raw rate and QBER");
    add_common(cal_cmd, cal_args, false);
    cal_cmd->get_option("--out")->description("Write the fitted scenario (JSON) here instead of stdout");
    cal_cmd->add_option("--target-raw", targets.raw_rate_hz, "Sifted key rate in Hz")->capture_default_str();
    cal_cmd->add_option("--target-qber", targets.qber, "QBER as a fraction")->capture_default_str();
    cal_cmd->add_option("--free", free_params, "transmittance|efficiency,visibility|dark_prob")
        ->capture_default_str();
    cal_cmd->add_option("--name", fitted_name, "Name for the fitted scenario");

    Common fringe_args;
    int points = 360;
    std::string fringe_partner;
    auto *fringe_cmd = app.add_subcommand("fringe", "Detection probabilities against phase difference");
    add_common(fringe_cmd, fringe_args, false);
    fringe_cmd->add_option("--points", points, "Number of phase samples")->capture_default_str();
    fringe_cmd->add_option("--partner", fringe_partner, "Ring entity id");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            auto s = load_scenario(run_args.scenario);
            report(run_args, run(s, options_of(run_args)));
        } else if (*net_cmd) {
            auto s = load_scenario(net_args.scenario);
            auto o = options_of(net_args);
            o.partner = partner;
            auto r = run(s, o);
            report(net_args, r);
            auto verdict = detect_disturbance(r.stats(), s.protocol.disturbance_threshold);
            std::cerr << "verdict      " << to_string(verdict) << " (threshold "
                      << s.protocol.disturbance_threshold << ")\n";
        } else if (*sweep_cmd) {
            auto s = load_scenario(sweep_args.scenario);
            report(sweep_args, sweep(s, axis, parse_grid(grid), options_of(sweep_args)));
        } else if (*cal_cmd) {
            auto s = load_scenario(cal_args.scenario);
            auto [rate_knob, qber_knob] = parse_free_parameters(free_params);
            if (!fitted_name.empty()) {
                auto doc = s.effective;
                doc["name"] = fitted_name;
                s = scenario_from_json(doc, cal_args.scenario);
            }
            auto r = calibrate(s, targets, rate_knob, qber_knob);
            emit(cal_args.out, [&](std::ostream &o) { o << r.fitted.effective.dump(2) << "\n"; });
            std::cerr << "rate knob    " << r.rate_value << "\n"
                      << "qber knob    " << r.qber_value << "\n"
                      << "visibility   " << r.visibility << "\n"
                      << "raw rate     " << r.expected.raw_rate_hz << " Hz\n"
                      << "qber         " << r.expected.qber << "\n"
                      << "iterations   " << r.iterations << "\n";
        } else if (*fringe_cmd) {
            auto s = load_scenario(fringe_args.scenario);
            auto f = fringe(s, points, fringe_partner);
            emit(fringe_args.out, [&](std::ostream &o) { write_fringe_csv(o, f); });
        }
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
