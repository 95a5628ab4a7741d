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

#ifndef CIRCQKD_QUANTUMCHANNEL_HPP
#define CIRCQKD_QUANTUMCHANNEL_HPP

#include <cstdint>
#include <span>
#include <string_view>

#include "circqkd/loopmodel.hpp"
#include "circqkd/rng.hpp"

namespace circqkd {

struct SourceParams {
    double mu = 0.1;              ///< mean photon number per pulse
    double rep_rate_hz = 100e3;   ///< pulses per second
    double wavelength_m = 830e-9;

    void validate() const;
};

enum class DoubleClickPolicy { discard, random_assign };

const char *to_string(DoubleClickPolicy policy);
DoubleClickPolicy double_click_policy_from_string(std::string_view name);

struct DetectorParams {
    double efficiency = 1.0;  ///< photon -> avalanche probability
    double dark_prob = 0.0;   ///< dark click probability per gate, per detector
    DoubleClickPolicy double_click_policy = DoubleClickPolicy::discard;
    /// Bit decoded from an APD1 click; APD2 decodes the complement.
    int apd1_bit = 0;

    void validate() const;
};

enum class ClickOutcome : uint8_t { none, d1, d2, both };

const char *to_string(ClickOutcome outcome);

struct ClickDistribution {
    double none = 1.0;
    double d1_only = 0.0;
    double d2_only = 0.0;
    double both = 0.0;

    double sum() const {
        return none + d1_only + d2_only + both;
    }
};

/// Joint click statistics of the two APDs for one Poissonian pulse.
///
/// A pulse of mean mu split with per-photon probabilities p1, p2 gives
/// independent Poisson photon numbers at the two detectors, so each detector
/// stays silent with probability (1 - dark) exp(-mu eta p_i) independently of
/// the other. Throws std::invalid_argument unless p1, p2 >= 0 and p1 + p2 <= 1.
ClickDistribution click_probabilities(double p1, double p2, const SourceParams &src, const DetectorParams &det);

/// One categorical draw; advances `rng` by exactly one draw. Throws
/// std::invalid_argument if the distribution has a negative entry or does
/// not sum to 1 within 1e-9.
ClickOutcome sample_pulse(const ClickDistribution &probs, RngStream &rng);

/// Random phase noise added to the interferometer phase difference.
struct PhaseNoise {
    enum class Kind { none, gaussian, uniform };
    Kind kind = Kind::none;
    /// Standard deviation of the phase-difference noise (gaussian only).
    double sigma = 0.0;

    bool active() const {
        return kind != Kind::none;
    }
};

/// One equally likely-or-weighted preparation/measurement case of the
/// protocol, as seen by the detectors.
struct PhaseCase {
    double weight = 0.0;      ///< probability of this case per pulse
    double delta_phi = 0.0;   ///< phase difference at the coupler
    bool sifted = false;      ///< kept by basis reconciliation
    int expected_bit = 0;     ///< Alice's bit, for error accounting
};

/// Closed-form per-pulse expectations of a session.
struct ExpectedSession {
    double p_single_click = 0.0;  ///< single click after double-click policy
    double p_sifted = 0.0;        ///< sifted bit per pulse
    double p_error = 0.0;         ///< sifted and wrong per pulse
    double p_d1 = 0.0;            ///< decodes from APD1 per pulse
    double p_d2 = 0.0;
    double raw_rate_hz = 0.0;     ///< rep_rate * p_sifted
    double qber = 0.0;            ///< p_error / p_sifted, NaN when p_sifted = 0
};

/// Averages click statistics over `cases` (weights must sum to 1) and, when
/// `noise` is active, over the phase noise by quadrature.
ExpectedSession expected_session(const LoopResponse &loop, std::span<const PhaseCase> cases,
                                 const SourceParams &src, const DetectorParams &det, const PhaseNoise &noise = {});

}  // namespace circqkd

#endif
