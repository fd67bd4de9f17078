// SPDX-License-Identifier: Apache-2.0
//
// mvlink - multi-vehicular hybrid MIMO link-level simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace mvlink
{

// Counter-based seed derivation. Every random stream in a run is seeded as
// derive_seed(master, stream_tag, a, b, c); streams are therefore independent
// of thread scheduling and of each other's draw counts.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t s0, std::uint64_t s1 = 0,
                                 std::uint64_t s2 = 0, std::uint64_t s3 = 0)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ s0);
    h = splitmix64(h ^ s1);
    h = splitmix64(h ^ s2);
    h = splitmix64(h ^ s3);
    return h;
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t s0, std::uint64_t s1 = 0,
                                std::uint64_t s2 = 0, std::uint64_t s3 = 0)
{
    return std::mt19937_64(derive_seed(master, s0, s1, s2, s3));
}

// Stream tags (first derivation component after the master seed)
namespace stream
{
constexpr std::uint64_t alignment = 1;
constexpr std::uint64_t training = 2;
constexpr std::uint64_t evaluation = 3;
} // namespace stream

} // namespace mvlink
