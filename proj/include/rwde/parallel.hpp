// Copyright 2026 The RWDE Authors
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

#ifndef RWDE_PARALLEL_HPP_
#define RWDE_PARALLEL_HPP_

#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace rwde {

// Worker count: RWDE_THREADS if set, otherwise the hardware count.
inline int thread_count() {
  if (const char* env = std::getenv("RWDE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, n).  Work is split into contiguous index blocks,
// one per worker; results must be written into per-index slots so the output
// does not depend on the split.  The first exception thrown wins.
template <typename Body>
void parallel_for(std::int64_t n, const Body& body) {
  const int workers = thread_count();
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  const int used = static_cast<int>(std::min<std::int64_t>(workers, n));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(used);
  const std::int64_t chunk = (n + used - 1) / used;
  for (int w = 0; w < used; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace rwde

#endif  // RWDE_PARALLEL_HPP_
