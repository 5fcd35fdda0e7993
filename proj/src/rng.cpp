// Copyright 2026 The epifront Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "epifront/rng.hpp"

#include <cmath>
#include <numbers>

namespace epifront {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr std::uint32_t kUniformLane = 1u << 16;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

// 53 random bits mapped to the midpoint grid of (0, 1); never returns 0 or 1.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    return mix64(mix64(master) ^ (tag * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull));
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t index, StreamKind kind)
    : seed_(seed), index_(index), kind_(kind) {}

std::array<std::uint32_t, 4> NoiseStream::block(std::uint64_t block_index, std::uint32_t lane) const {
    const std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(block_index >> 32),
        static_cast<std::uint32_t>(index_),
        static_cast<std::uint32_t>(kind_) ^ lane ^ static_cast<std::uint32_t>(index_ >> 32) << 20};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                           static_cast<std::uint32_t>(seed_ >> 32)};
    return philox4x32(ctr, key);
}

double NoiseStream::normal() {
    const std::uint64_t k = counter_++;
    const std::uint64_t b = k >> 1;
    if ((k & 1u) != 0 && b == cached_block_) {
        return cached_sine_;
    }
    const auto r = block(b, 0);
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_block_ = b;
    cached_sine_ = radius * std::sin(angle);
    return (k & 1u) != 0 ? cached_sine_ : radius * std::cos(angle);
}

double NoiseStream::uniform() {
    const std::uint64_t k = counter_++;
    // separate counter lane: uniform draws never alias a normal block
    const auto r = block(k, kUniformLane);
    return to_open_unit(r[0], r[1]);
}

double NoiseStream::exponential() { return -std::log(uniform()); }

void NoiseStream::seek(std::uint64_t counter) {
    counter_ = counter;
    cached_block_ = ~std::uint64_t{0};
}

}  // namespace epifront
