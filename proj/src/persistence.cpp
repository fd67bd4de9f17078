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

#include "mvlink/persistence.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace mvlink
{

namespace
{

static_assert(std::endian::native == std::endian::little,
              "artifact I/O assumes a little-endian host");

constexpr char artifact_magic[8] = {'M', 'V', 'L', 'I', 'N', 'K', 'B', '1'};

template <typename T>
void write_scalar(std::ofstream& out, T value)
{
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_scalar(std::ifstream& in, const std::string& what)
{
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in)
    {
        throw std::runtime_error("artifact load: truncated while reading " + what);
    }
    return value;
}

} // namespace

bool ArtifactFile::contains(const std::string& name) const
{
    for (const NamedMatrix& block : blocks)
    {
        if (block.name == name)
        {
            return true;
        }
    }
    return false;
}

const arma::cx_mat& ArtifactFile::find(const std::string& name) const
{
    for (const NamedMatrix& block : blocks)
    {
        if (block.name == name)
        {
            return block.value;
        }
    }
    throw std::runtime_error("artifact: missing block '" + name + "'");
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed)
{
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = seed;
    for (std::size_t i = 0; i < size; ++i)
    {
        hash ^= static_cast<std::uint64_t>(bytes[i]);
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::uint64_t fnv1a64(const std::string& text, std::uint64_t seed)
{
    return fnv1a64(text.data(), text.size(), seed);
}

void save_artifact(const std::string& path, std::uint64_t config_hash, std::uint64_t seed,
                   const std::vector<NamedMatrix>& blocks)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw std::runtime_error("artifact save: cannot open '" + path + "'");
    }
    out.write(artifact_magic, sizeof(artifact_magic));
    write_scalar<std::uint32_t>(out, artifact_format_version);
    write_scalar<std::uint64_t>(out, config_hash);
    write_scalar<std::uint64_t>(out, seed);
    if (blocks.size() > std::numeric_limits<std::uint32_t>::max())
    {
        throw std::invalid_argument("artifact save: too many blocks");
    }
    write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(blocks.size()));

    for (const NamedMatrix& block : blocks)
    {
        if (block.name.size() > std::numeric_limits<std::uint32_t>::max())
        {
            throw std::invalid_argument("artifact save: block name too long");
        }
        write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(block.name.size()));
        out.write(block.name.data(), static_cast<std::streamsize>(block.name.size()));
        write_scalar<std::uint64_t>(out, block.value.n_rows);
        write_scalar<std::uint64_t>(out, block.value.n_cols);
        for (arma::uword c = 0; c < block.value.n_cols; ++c)
        {
            for (arma::uword r = 0; r < block.value.n_rows; ++r)
            {
                const std::complex<double> z = block.value(r, c);
                write_scalar<double>(out, z.real());
                write_scalar<double>(out, z.imag());
            }
        }
    }
    out.flush();
    if (!out)
    {
        throw std::runtime_error("artifact save: write failed for '" + path + "'");
    }
}

ArtifactFile load_artifact(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error("artifact load: cannot open '" + path + "'");
    }

    char magic[sizeof(artifact_magic)] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, artifact_magic, sizeof(magic)) != 0)
    {
        throw std::runtime_error("artifact load: bad magic in '" + path + "'");
    }

    ArtifactFile file;
    file.version = read_scalar<std::uint32_t>(in, "version");
    if (file.version != artifact_format_version)
    {
        throw std::runtime_error("artifact load: unsupported format version " +
                                 std::to_string(file.version));
    }
    file.config_hash = read_scalar<std::uint64_t>(in, "config hash");
    file.seed = read_scalar<std::uint64_t>(in, "seed");
    const auto count = read_scalar<std::uint32_t>(in, "block count");

    file.blocks.reserve(count);
    for (std::uint32_t b = 0; b < count; ++b)
    {
        NamedMatrix block;
        const auto name_len = read_scalar<std::uint32_t>(in, "name length");
        block.name.resize(name_len);
        in.read(block.name.data(), static_cast<std::streamsize>(name_len));
        if (!in)
        {
            throw std::runtime_error("artifact load: truncated block name");
        }
        const auto n_rows = read_scalar<std::uint64_t>(in, "rows");
        const auto n_cols = read_scalar<std::uint64_t>(in, "cols");
        block.value.set_size(static_cast<arma::uword>(n_rows), static_cast<arma::uword>(n_cols));
        for (arma::uword c = 0; c < block.value.n_cols; ++c)
        {
            for (arma::uword r = 0; r < block.value.n_rows; ++r)
            {
                const double re = read_scalar<double>(in, "matrix data");
                const double im = read_scalar<double>(in, "matrix data");
                block.value(r, c) = std::complex<double>(re, im);
            }
        }
        file.blocks.push_back(std::move(block));
    }
    return file;
}

ArtifactFile load_artifact_checked(const std::string& path, std::uint64_t expected_hash)
{
    ArtifactFile file = load_artifact(path);
    if (file.config_hash != expected_hash)
    {
        throw std::invalid_argument("artifact load: config hash mismatch for '" + path + "'");
    }
    return file;
}

} // namespace mvlink
