// cfisac: cell-free ISAC simulation library
// Copyright 2026 The cfisac Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cfisac/rng.hpp"

namespace cfisac {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

RandomStream RandomStream::substream(std::uint64_t key) const {
  return RandomStream(splitmix64(seed_ ^ splitmix64(key + 0x632BE59BD9B4E019ULL)));
}

RandomStream RandomStream::substream(std::initializer_list<std::uint64_t> keys) const {
  RandomStream out(seed_);
  for (std::uint64_t k : keys) out = out.substream(k);
  return out;
}

double RandomStream::uniform() { return uniform_(engine_); }

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }

double RandomStream::normal() { return normal_(engine_); }

Complex RandomStream::complex_normal() {
  constexpr double kScale = 0.70710678118654752440;
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {kScale * re, kScale * im};
}

CVector RandomStream::complex_normal_vector(Eigen::Index n) {
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_normal();
  return v;
}

CMatrix RandomStream::complex_normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  CMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = complex_normal();
  return m;
}

std::size_t RandomStream::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace cfisac
