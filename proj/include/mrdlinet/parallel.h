/*
 * Copyright 2026 The MRD-LiNet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MRDLINET_PARALLEL_H_
#define MRDLINET_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mrdlinet {

// Runs fn(worker, index) for every index in [0, n) on up to `workers`
// threads. Indices are handed out dynamically, so fn must write its result
// to a slot keyed by index for the output to be order-independent. The
// first exception thrown by any worker is rethrown on the caller.
template <typename F>
void parallel_for(size_t n, int workers, F&& fn) {
  const size_t threads = std::min<size_t>(std::max(workers, 1), std::max<size_t>(n, 1));
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(size_t{0}, i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = next++; i < n; i = next++) {
        try {
          fn(w, i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mrdlinet

#endif  // MRDLINET_PARALLEL_H_
