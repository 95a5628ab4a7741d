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

#include <cmath>

#include "circqkd/rng.hpp"
#include "doctest.h"

using namespace circqkd;

TEST_CASE("philox known answers") {
    using A4 = std::array<uint32_t, 4>;
    using A2 = std::array<uint32_t, 2>;
    CHECK(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and separated") {
    RngStream a(42, 7, Lane::channel), b(42, 7, Lane::channel);
    for (int k = 0; k < 100; k++) {
        CHECK(a.next_u64() == b.next_u64());
    }
    CHECK(a.draws() == 100);

    RngStream c(42, 7, Lane::protocol), d(42, 8, Lane::channel), e(43, 7, Lane::channel);
    RngStream ref(42, 7, Lane::channel);
    uint64_t r = ref.next_u64();
    CHECK(c.next_u64() != r);
    CHECK(d.next_u64() != r);
    CHECK(e.next_u64() != r);
}

TEST_CASE("uniform, bit and normal draws") {
    RngStream rng(1, 0, Lane::bookkeeping);
    const int n = 200000;
    double sum = 0, sum2 = 0;
    int ones = 0;
    for (int k = 0; k < n; k++) {
        double u = rng.next_uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        ones += rng.next_bit();
    }
    CHECK(std::abs(sum / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(ones / double(n) - 0.5) < 4 * std::sqrt(0.25 / n));

    sum = 0;
    for (int k = 0; k < n; k++) {
        uint32_t before = rng.draws();
        double z = rng.next_normal();
        REQUIRE(rng.draws() == before + 2);
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / n) < 4 / std::sqrt(double(n)));
    CHECK(std::abs(sum2 / n - 1) < 4 * std::sqrt(2.0 / n));
}
