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

#ifndef CIRCQKD_JONES_HPP
#define CIRCQKD_JONES_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

namespace circqkd {

using Complex = std::complex<double>;

/// Polarization amplitude of a fully polarized pulse.
struct JonesState {
    Complex ex{1.0, 0.0};
    Complex ey{0.0, 0.0};

    double norm2() const {
        return std::norm(ex) + std::norm(ey);
    }
    bool is_normalized(double tol = 1e-12) const {
        return std::abs(norm2() - 1.0) <= tol;
    }

    static JonesState horizontal() {
        return {{1, 0}, {0, 0}};
    }
    static JonesState vertical() {
        return {{0, 0}, {1, 0}};
    }
    /// Linear polarization at `azimuth` radians from x.
    static JonesState linear(double azimuth);
};

/// Inner product <a, b> = a^dagger b.
Complex inner(const JonesState &a, const JonesState &b);

/// 2x2 complex matrix acting on JonesState. Row-major storage.
class JonesOperator {
   public:
    JonesOperator() : m_{Complex{1}, Complex{0}, Complex{0}, Complex{1}} {
    }
    JonesOperator(Complex a, Complex b, Complex c, Complex d) : m_{a, b, c, d} {
    }

    static JonesOperator identity() {
        return {};
    }
    static JonesOperator diag(Complex a, Complex d) {
        return {a, 0.0, 0.0, d};
    }
    /// Coordinate rotation by `theta` (mixes x and y with a real orthogonal
    /// matrix). Not symmetric unless theta is a multiple of pi.
    static JonesOperator rotation(double theta);
    /// Linear retarder with fast axis at `azimuth`, phase retardance `retardance`,
    /// in the symmetric e^{-i r/2}, e^{+i r/2} form (determinant 1).
    static JonesOperator retarder(double azimuth, double retardance);
    static JonesOperator quarter_wave(double azimuth);
    static JonesOperator half_wave(double azimuth);
    /// Diattenuator with amplitude transmittances t_max along `azimuth` and
    /// t_min orthogonal to it. Symmetric by construction.
    static JonesOperator diattenuator(double azimuth, double t_max, double t_min);
    /// Haar-random element of U(2) drawn from a seeded counter stream.
    static JonesOperator random_unitary(uint64_t seed);
    /// Haar-random U such that U^T = U (built as V^T V with V Haar random).
    static JonesOperator random_symmetric_unitary(uint64_t seed);

    Complex operator()(int row, int col) const {
        return m_[row * 2 + col];
    }
    Complex &operator()(int row, int col) {
        return m_[row * 2 + col];
    }

    JonesOperator operator*(const JonesOperator &rhs) const;
    JonesState operator*(const JonesState &v) const;
    JonesOperator scaled(Complex s) const;

    JonesOperator transpose() const;
    JonesOperator adjoint() const;
    JonesOperator conjugate() const;

    bool is_unitary(double tol = 1e-12) const;
    /// Largest absolute entry-wise difference.
    double max_abs_diff(const JonesOperator &other) const;
    /// Singular values, largest first.
    std::array<double, 2> singular_values() const;

    std::string str() const;

   private:
    std::array<Complex, 4> m_;
};

/// Three-paddle controller angles: quarter, half, quarter wave plates.
struct PcSetting {
    double quarter_in = 0.0;
    double half = 0.0;
    double quarter_out = 0.0;

    /// Every angle reduced to [0, 2 pi).
    PcSetting reduced() const;
};

/// Reduce an angle to [0, 2 pi).
double wrap_angle(double radians);

/// Product of `ops` in traversal order: the first element acts first.
/// Throws std::invalid_argument on an empty list.
JonesOperator compose(std::span<const JonesOperator> ops);
JonesOperator compose(std::initializer_list<JonesOperator> ops);

/// Counter-propagating operator of a reciprocal element in a fixed lab basis.
inline JonesOperator backward(const JonesOperator &op) {
    return op.transpose();
}

/// |<u_ccw input, u_cw input>|. Operators are expected to be unitary; the
/// input must be normalized (throws std::invalid_argument otherwise).
double visibility(const JonesState &input, const JonesOperator &u_cw, const JonesOperator &u_ccw);

/// QWP(quarter_in) * HWP(half) * QWP(quarter_out); the `quarter_out` plate
/// acts on the light first.
JonesOperator pc_matrix(const PcSetting &setting);

using PcObjective = std::function<double(const PcSetting &)>;

struct PcOptimum {
    PcSetting setting;
    double value;
    int evaluations;
};

/// Maximizes `objective` over the three controller angles.
///
/// Coordinate ascent, one angle at a time: a coarse periodic scan brackets the
/// best cell and golden-section search refines inside it. The descent is
/// restarted from `initial` and from the 8 points of the lattice
/// {pi/2, 3pi/2}^3; the best result across restarts is returned. Fully
/// deterministic. Throws std::domain_error if the objective returns a
/// non-finite value and std::invalid_argument if tol <= 0.
PcOptimum optimize_pc(const PcObjective &objective, const PcSetting &initial, double tol = 1e-9);

}  // namespace circqkd

#endif
