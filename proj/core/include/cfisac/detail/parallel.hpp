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

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace cfisac {

template <typename T>
DropResults<T> for_each_drop(int num_drops, int jobs, const std::function<T(int)>& work) {
  DropResults<T> out;
  out.values.resize(num_drops);
  out.errors.resize(num_drops);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int d = next.fetch_add(1); d < num_drops; d = next.fetch_add(1)) {
      try {
        out.values[d] = work(d);
      } catch (const std::exception& e) {
        out.errors[d] = e.what();
      } catch (...) {
        out.errors[d] = "unknown error";
      }
    }
  };
  const int threads = std::clamp(jobs, 1, std::max(1, num_drops));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& v : out.values)
    if (!v) ++out.failed;
  return out;
}

}  // namespace cfisac
