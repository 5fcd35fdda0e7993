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

#pragma once

#include <array>
#include <cstdint>

namespace epifront {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to derive independent master seeds per replication.
std::uint64_t mix64(std::uint64_t x);

/// Seed for replication `tag` of an experiment keyed by `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);

/// Sub-stream selectors. Each particle owns one stream of each kind.
enum class StreamKind : std::uint32_t {
    Brownian = 0,
    Clock = 1,
    Initial = 2,
    Auxiliary = 3,
};

/// Counter-based random stream keyed by (master seed, particle index, kind).
///
/// Draw number k is a pure function of (seed, index, kind, k): two Philox
/// outputs are consumed per block, so normals come in Box-Muller pairs and
/// the k-th normal is the cosine (even k) or sine (odd k) branch of block k/2.
/// Replaying from counter 0 reproduces the sequence bit for bit, independent
/// of which thread owns the stream.
class NoiseStream {
public:
    NoiseStream() = default;
    NoiseStream(std::uint64_t seed, std::uint64_t index, StreamKind kind = StreamKind::Brownian);

    double normal();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double exponential();

    std::uint64_t counter() const { return counter_; }
    void seek(std::uint64_t counter);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

private:
    std::array<std::uint32_t, 4> block(std::uint64_t block_index, std::uint32_t lane) const;

    std::uint64_t seed_ = 0;
    std::uint64_t index_ = 0;
    StreamKind kind_ = StreamKind::Brownian;
    std::uint64_t counter_ = 0;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    double cached_sine_ = 0.0;
};

}  // namespace epifront
