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

#include "circqkd/quantumchannel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace circqkd {

void SourceParams::validate() const {
    if (!(mu >= 0) || !std::isfinite(mu)) {
        throw std::invalid_argument("source.mu must be >= 0");
    }
    if (!(rep_rate_hz > 0) || !std::isfinite(rep_rate_hz)) {
        throw std::invalid_argument("source.rep_rate_hz must be > 0");
    }
    if (!(wavelength_m > 0)) {
        throw std::invalid_argument("source.wavelength_m must be > 0");
    }
}

const char *to_string(DoubleClickPolicy policy) {
    return policy == DoubleClickPolicy::discard ? "discard" : "random_assign";
}

DoubleClickPolicy double_click_policy_from_string(std::string_view name) {
    if (name == "discard") {
        return DoubleClickPolicy::discard;
    }
    if (name == "random_assign") {
        return DoubleClickPolicy::random_assign;
    }
    throw std::invalid_argument("unknown double_click_policy '" + std::string(name) +
                                "' (expected discard or random_assign)");
}

void DetectorParams::validate() const {
    if (!(efficiency >= 0 && efficiency <= 1)) {
        throw std::invalid_argument("detectors.efficiency must lie in [0, 1]");
    }
    if (!(dark_prob >= 0 && dark_prob < 1)) {
        throw std::invalid_argument("detectors.dark_prob must lie in [0, 1)");
    }
    if (apd1_bit != 0 && apd1_bit != 1) {
        throw std::invalid_argument("detectors.apd1_bit must be 0 or 1");
    }
}

const char *to_string(ClickOutcome outcome) {
    switch (outcome) {
        case ClickOutcome::none:
            return "none";
        case ClickOutcome::d1:
            return "d1";
        case ClickOutcome::d2:
            return "d2";
        case ClickOutcome::both:
            return "both";
    }
    return "?";
}

ClickDistribution click_probabilities(double p1, double p2, const SourceParams &src, const DetectorParams &det) {
    if (!(p1 >= 0) || !(p2 >= 0) || !(p1 + p2 <= 1 + 1e-12)) {
        throw std::invalid_argument("click_probabilities: need p1, p2 >= 0 and p1 + p2 <= 1 (got " +
                                    std::to_string(p1) + ", " + std::to_string(p2) + ")");
    }
    const double scale = src.mu * det.efficiency;
    const double quiet = 1.0 - det.dark_prob;
    const double silent1 = quiet * std::exp(-scale * p1);
    const double silent2 = quiet * std::exp(-scale * p2);
    // 1 - silent via expm1 keeps precision when mu * eta * p is tiny.
    const double fire1 = det.dark_prob + quiet * -std::expm1(-scale * p1);
    const double fire2 = det.dark_prob + quiet * -std::expm1(-scale * p2);
    return {silent1 * silent2, fire1 * silent2, silent1 * fire2, fire1 * fire2};
}

ClickOutcome sample_pulse(const ClickDistribution &q, RngStream &rng) {
    if (!(q.none >= 0 && q.d1_only >= 0 && q.d2_only >= 0 && q.both >= 0) || std::abs(q.sum() - 1.0) > 1e-9) {
        throw std::invalid_argument("sample_pulse: malformed click distribution");
    }
    double u = rng.next_uniform();
    if (u < q.none) {
        return ClickOutcome::none;
    }
    u -= q.none;
    if (u < q.d1_only) {
        return ClickOutcome::d1;
    }
    u -= q.d1_only;
    if (u < q.d2_only) {
        return ClickOutcome::d2;
    }
    // Remaining mass, including any rounding slack, belongs to the last non-empty outcome.
    if (q.both > 0) {
        return ClickOutcome::both;
    }
    return q.d2_only > 0 ? ClickOutcome::d2 : (q.d1_only > 0 ? ClickOutcome::d1 : ClickOutcome::none);
}

namespace {

struct Node {
    double offset;
    double weight;
};

// Quadrature over the phase-difference noise.
std::vector<Node> noise_nodes(const PhaseNoise &noise) {
    using std::numbers::pi;
    std::vector<Node> nodes;
    if (noise.kind == PhaseNoise::Kind::none || (noise.kind == PhaseNoise::Kind::gaussian && noise.sigma == 0)) {
        nodes.push_back({0.0, 1.0});
        return nodes;
    }
    if (noise.kind == PhaseNoise::Kind::uniform) {
        // Periodic trapezoid: spectrally accurate for smooth periodic integrands.
        constexpr int n = 512;
        for (int k = 0; k < n; k++) {
            nodes.push_back({2 * pi * k / n, 1.0 / n});
        }
        return nodes;
    }
    if (!(noise.sigma > 0) || !std::isfinite(noise.sigma)) {
        throw std::invalid_argument("phase noise sigma must be finite and >= 0");
    }
    // Trapezoid over +-12 sigma of the Gaussian density; the integrand is
    // entire in the offset, so the rule converges geometrically.
    constexpr int n = 1201;
    const double half_width = 12.0 * noise.sigma;
    const double h = 2 * half_width / (n - 1);
    double total = 0;
    for (int k = 0; k < n; k++) {
        double x = -half_width + k * h;
        double w = std::exp(-0.5 * (x / noise.sigma) * (x / noise.sigma));
        nodes.push_back({x, w});
        total += w;
    }
    for (auto &node : nodes) {
        node.weight /= total;
    }
    return nodes;
}

}  // namespace

ExpectedSession expected_session(const LoopResponse &loop, std::span<const PhaseCase> cases,
                                 const SourceParams &src, const DetectorParams &det, const PhaseNoise &noise) {
    src.validate();
    det.validate();
    double weight_sum = 0;
    for (const auto &c : cases) {
        if (!(c.weight >= 0)) {
            throw std::invalid_argument("expected_session: negative case weight");
        }
        weight_sum += c.weight;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
        throw std::invalid_argument("expected_session: case weights must sum to 1");
    }

    const auto nodes = noise_nodes(noise);
    const bool assign = det.double_click_policy == DoubleClickPolicy::random_assign;
    ExpectedSession out;
    for (const auto &c : cases) {
        double d1 = 0, d2 = 0;
        for (const auto &node : nodes) {
            auto p = loop.at(c.delta_phi + node.offset);
            auto q = click_probabilities(p.p1, p.p2, src, det);
            double extra = assign ? 0.5 * q.both : 0.0;
            d1 += node.weight * (q.d1_only + extra);
            d2 += node.weight * (q.d2_only + extra);
        }
        out.p_d1 += c.weight * d1;
        out.p_d2 += c.weight * d2;
        out.p_single_click += c.weight * (d1 + d2);
        if (c.sifted) {
            out.p_sifted += c.weight * (d1 + d2);
            double wrong = (c.expected_bit == det.apd1_bit) ? d2 : d1;
            out.p_error += c.weight * wrong;
        }
    }
    out.raw_rate_hz = src.rep_rate_hz * out.p_sifted;
    out.qber = out.p_sifted > 0 ? out.p_error / out.p_sifted : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace circqkd
