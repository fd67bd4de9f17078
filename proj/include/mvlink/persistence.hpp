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
#include <string>
#include <vector>

#include <armadillo>

namespace mvlink
{

// One named complex-matrix block inside an artifact file.
struct NamedMatrix
{
    std::string name;
    arma::cx_mat value;
};

// Versioned container for learned artifacts (beam lists, subspace models).
// Layout: 8-byte magic, u32 format version, u64 config hash, u64 seed,
// u32 block count, then per block a length-prefixed name followed by u64
// rows/cols and column-major interleaved re/im doubles. Little-endian.
struct ArtifactFile
{
    std::uint32_t version = 0;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<NamedMatrix> blocks;

    bool contains(const std::string& name) const;
    // Throws std::runtime_error when the block is absent.
    const arma::cx_mat& find(const std::string& name) const;
};

inline constexpr std::uint32_t artifact_format_version = 1;

// FNV-1a 64-bit hash used to fingerprint experiment configurations.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 1469598103934665603ULL);
std::uint64_t fnv1a64(const std::string& text, std::uint64_t seed = 1469598103934665603ULL);

// Writes all blocks to path. Throws std::runtime_error on I/O failure.
void save_artifact(const std::string& path, std::uint64_t config_hash, std::uint64_t seed,
                   const std::vector<NamedMatrix>& blocks);

// Reads an artifact. Bad magic, unsupported version, or truncation raise
// std::runtime_error.
ArtifactFile load_artifact(const std::string& path);

// Same, but additionally refuses (std::invalid_argument) an artifact whose
// stored config hash differs from expected_hash.
ArtifactFile load_artifact_checked(const std::string& path, std::uint64_t expected_hash);

} // namespace mvlink
