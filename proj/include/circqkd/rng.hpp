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

#ifndef CIRCQKD_RNG_HPP
#define CIRCQKD_RNG_HPP

#include <array>
#include <cstdint>

namespace circqkd {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> counter, std::array<uint32_t, 2> key);

/// Named substreams. Each pulse owns one stream per lane, so adding or
/// removing consumers on one lane never shifts the draws seen by another.
enum class Lane : uint32_t {
    protocol = 0,     ///< Alice / Bob basis and bit choices
    channel = 1,      ///< click sampling
    eve = 2,          ///< intercept-resend decisions
    disturbance = 3,  ///< phase noise from non-selected ring entities
    bookkeeping = 4,  ///< double-click assignment, disclosure subset
    config = 5,       ///< seeded random optics (birefringence draws)
};

/// Counter-based deterministic stream.
///
/// Draw `d` of stream `(seed, index, lane)` is the Philox block at counter
/// `(d, lane, index_lo, index_hi)` under key `(seed_lo, seed_hi)`. Any single
/// draw of any pulse can therefore be regenerated without replaying the
/// session, and shards of the pulse index space are reproducible regardless
/// of scheduling.
class RngStream {
   public:
    RngStream(uint64_t seed, uint64_t index, Lane lane = Lane::protocol)
        : seed_(seed), index_(index), lane_(static_cast<uint32_t>(lane)) {
    }

    uint64_t next_u64();
    /// Uniform on [0, 1) with 53 bits of resolution. One draw.
    double next_uniform();
    /// Single fair bit. One draw.
    int next_bit();
    /// Standard normal via Box-Muller. Two draws.
    double next_normal();

    uint64_t seed() const {
        return seed_;
    }
    uint64_t index() const {
        return index_;
    }
    uint32_t draws() const {
        return draws_;
    }

   private:
    uint64_t seed_;
    uint64_t index_;
    uint32_t lane_;
    uint32_t draws_ = 0;
};

}  // namespace circqkd

#endif
