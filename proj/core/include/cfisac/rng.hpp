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

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "cfisac/types.hpp"

namespace cfisac {

// Seeded random source with deterministic, order-independent substreams.
// substream() derives a child from the construction seed only, so the child
// does not depend on how many draws were made from the parent.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  RandomStream substream(std::uint64_t key) const;
  RandomStream substream(std::initializer_list<std::uint64_t> keys) const;

  double uniform();
  double uniform(double lo, double hi);
  double normal();
  // Circularly-symmetric CN(0, 1).
  Complex complex_normal();
  CVector complex_normal_vector(Eigen::Index n);
  CMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols);
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cfisac
