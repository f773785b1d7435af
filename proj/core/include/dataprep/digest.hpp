// Copyright 2026 The dataprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DATAPREP_DIGEST_HPP_
#define DATAPREP_DIGEST_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace dataprep {

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// Incremental SHA-256 for digesting large or streamed content.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes);
  std::string hex_digest();

 private:
  void* ctx_;
};

/// Per-node seed: first 8 bytes of SHA-256("<root>:<index>"), big-endian.
std::uint64_t derive_seed(std::uint64_t root_seed, std::uint64_t index);

/// Unbiased draw in [0, n) by rejection sampling on the raw 64-bit stream.
/// std::uniform_int_distribution is implementation-defined, so seeded draws
/// would differ across standard libraries; this does not.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

}  // namespace dataprep

#endif  // DATAPREP_DIGEST_HPP_
