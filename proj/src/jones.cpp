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

#include "circqkd/jones.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "circqkd/rng.hpp"

namespace circqkd {

using std::numbers::pi;

JonesState JonesState::linear(double azimuth) {
    return {{std::cos(azimuth), 0}, {std::sin(azimuth), 0}};
}

Complex inner(const JonesState &a, const JonesState &b) {
    return std::conj(a.ex) * b.ex + std::conj(a.ey) * b.ey;
}

JonesOperator JonesOperator::rotation(double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    return {c, -s, s, c};
}

JonesOperator JonesOperator::retarder(double azimuth, double retardance) {
    // R(az) diag(e^{-i r/2}, e^{i r/2}) R(-az)
    auto d = diag(std::polar(1.0, -retardance / 2), std::polar(1.0, retardance / 2));
    return rotation(azimuth) * d * rotation(-azimuth);
}

JonesOperator JonesOperator::quarter_wave(double azimuth) {
    return retarder(azimuth, pi / 2);
}

JonesOperator JonesOperator::half_wave(double azimuth) {
    return retarder(azimuth, pi);
}

JonesOperator JonesOperator::diattenuator(double azimuth, double t_max, double t_min) {
    if (!(t_max >= 0 && t_max <= 1 && t_min >= 0 && t_min <= 1)) {
        throw std::invalid_argument("diattenuator transmittances must lie in [0, 1]");
    }
    return rotation(azimuth) * diag(t_max, t_min) * rotation(-azimuth);
}

JonesOperator JonesOperator::random_unitary(uint64_t seed) {
    RngStream rng(seed, 0, Lane::config);
    double g[4];
    double n2 = 0;
    for (double &x : g) {
        x = rng.next_normal();
        n2 += x * x;
    }
    double n = std::sqrt(n2);
    Complex a{g[0] / n, g[1] / n};
    Complex b{g[2] / n, g[3] / n};
    Complex phase = std::polar(1.0, 2 * pi * rng.next_uniform());
    JonesOperator su2{a, -std::conj(b), b, std::conj(a)};
    return su2.scaled(phase);
}

JonesOperator JonesOperator::random_symmetric_unitary(uint64_t seed) {
    auto v = random_unitary(seed);
    return v.transpose() * v;
}

JonesOperator JonesOperator::operator*(const JonesOperator &r) const {
    const auto &l = *this;
    return {l(0, 0) * r(0, 0) + l(0, 1) * r(1, 0), l(0, 0) * r(0, 1) + l(0, 1) * r(1, 1),
            l(1, 0) * r(0, 0) + l(1, 1) * r(1, 0), l(1, 0) * r(0, 1) + l(1, 1) * r(1, 1)};
}

JonesState JonesOperator::operator*(const JonesState &v) const {
    return {m_[0] * v.ex + m_[1] * v.ey, m_[2] * v.ex + m_[3] * v.ey};
}

JonesOperator JonesOperator::scaled(Complex s) const {
    return {m_[0] * s, m_[1] * s, m_[2] * s, m_[3] * s};
}

JonesOperator JonesOperator::transpose() const {
    return {m_[0], m_[2], m_[1], m_[3]};
}

JonesOperator JonesOperator::adjoint() const {
    return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
}

JonesOperator JonesOperator::conjugate() const {
    return {std::conj(m_[0]), std::conj(m_[1]), std::conj(m_[2]), std::conj(m_[3])};
}

bool JonesOperator::is_unitary(double tol) const {
    return (adjoint() * *this).max_abs_diff(identity()) <= tol;
}

double JonesOperator::max_abs_diff(const JonesOperator &other) const {
    double worst = 0;
    for (int k = 0; k < 4; k++) {
        worst = std::max(worst, std::abs(m_[k] - other.m_[k]));
    }
    return worst;
}

std::array<double, 2> JonesOperator::singular_values() const {
    // Eigenvalues of the Hermitian m^dagger m.
    auto h = adjoint() * *this;
    double a = h(0, 0).real();
    double d = h(1, 1).real();
    double b2 = std::norm(h(0, 1));
    double mean = 0.5 * (a + d);
    double disc = std::sqrt(std::max(0.0, 0.25 * (a - d) * (a - d) + b2));
    return {std::sqrt(std::max(0.0, mean + disc)), std::sqrt(std::max(0.0, mean - disc))};
}

std::string JonesOperator::str() const {
    std::ostringstream out;
    out << "[[" << m_[0] << ", " << m_[1] << "], [" << m_[2] << ", " << m_[3] << "]]";
    return out.str();
}

double wrap_angle(double radians) {
    double r = std::fmod(radians, 2 * pi);
    if (r < 0) {
        r += 2 * pi;
    }
    // fmod of a tiny negative value can round up to exactly 2 pi.
    return r >= 2 * pi ? 0.0 : r;
}

PcSetting PcSetting::reduced() const {
    return {wrap_angle(quarter_in), wrap_angle(half), wrap_angle(quarter_out)};
}

JonesOperator compose(std::span<const JonesOperator> ops) {
    if (ops.empty()) {
        throw std::invalid_argument("compose: operator list is empty");
    }
    JonesOperator total = ops.front();
    for (size_t k = 1; k < ops.size(); k++) {
        total = ops[k] * total;
    }
    return total;
}

JonesOperator compose(std::initializer_list<JonesOperator> ops) {
    return compose(std::span<const JonesOperator>(ops.begin(), ops.size()));
}

double visibility(const JonesState &input, const JonesOperator &u_cw, const JonesOperator &u_ccw) {
    if (!input.is_normalized()) {
        throw std::invalid_argument("visibility: input state is not normalized");
    }
    return std::abs(inner(u_ccw * input, u_cw * input));
}

JonesOperator pc_matrix(const PcSetting &s) {
    return JonesOperator::quarter_wave(s.quarter_in) * JonesOperator::half_wave(s.half) *
           JonesOperator::quarter_wave(s.quarter_out);
}

namespace {

constexpr int kScanPoints = 24;
constexpr int kMaxSweeps = 200;
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

double &coord(PcSetting &s, int k) {
    return k == 0 ? s.quarter_in : (k == 1 ? s.half : s.quarter_out);
}

class CountedObjective {
   public:
    explicit CountedObjective(const PcObjective &f) : f_(f) {
    }
    double operator()(const PcSetting &s) {
        double v = f_(s.reduced());
        evaluations++;
        if (!std::isfinite(v)) {
            throw std::domain_error("optimize_pc: objective returned a non-finite value");
        }
        return v;
    }
    int evaluations = 0;

   private:
    const PcObjective &f_;
};

// Best value of f along coordinate k of `s`; updates s and value in place.
void line_search(CountedObjective &f, PcSetting &s, double &value, int k) {
    const double step = 2 * pi / kScanPoints;
    const double origin = coord(s, k);
    double best_x = origin;
    double best_v = value;
    for (int j = 1; j < kScanPoints; j++) {
        PcSetting probe = s;
        coord(probe, k) = origin + j * step;
        double v = f(probe);
        if (v > best_v) {
            best_v = v;
            best_x = coord(probe, k);
        }
    }

    double lo = best_x - step, hi = best_x + step;
    auto eval_at = [&](double x) {
        PcSetting probe = s;
        coord(probe, k) = x;
        return f(probe);
    };
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = eval_at(x1), f2 = eval_at(x2);
    while (hi - lo > 1e-10) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = eval_at(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = eval_at(x1);
        }
    }
    if (f1 > best_v) {
        best_v = f1;
        best_x = x1;
    }
    if (f2 > best_v) {
        best_v = f2;
        best_x = x2;
    }
    coord(s, k) = wrap_angle(best_x);
    value = best_v;
}

}  // namespace

PcOptimum optimize_pc(const PcObjective &objective, const PcSetting &initial, double tol) {
    if (!(tol > 0)) {
        throw std::invalid_argument("optimize_pc: tol must be positive");
    }
    CountedObjective f(objective);

    std::vector<PcSetting> seeds{initial.reduced()};
    for (int m = 0; m < 8; m++) {
        seeds.push_back({pi / 2 + pi * (m & 1), pi / 2 + pi * ((m >> 1) & 1), pi / 2 + pi * ((m >> 2) & 1)});
    }

    PcOptimum best{seeds.front(), f(seeds.front()), 0};
    for (const auto &seed : seeds) {
        PcSetting s = seed;
        double value = f(s);
        for (int sweep = 0; sweep < kMaxSweeps; sweep++) {
            double before = value;
            for (int k = 0; k < 3; k++) {
                line_search(f, s, value, k);
            }
            if (value - before < tol * 1e-3) {
                break;
            }
        }
        if (value > best.value) {
            best.setting = s.reduced();
            best.value = value;
        }
    }
    best.evaluations = f.evaluations;
    return best;
}

}  // namespace circqkd
