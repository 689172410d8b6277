// Copyright 2026 The mmdest Authors.
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

#ifndef MMDEST_PARALLEL_HPP_
#define MMDEST_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mmdest {

namespace detail {
inline std::atomic<int>& thread_cap_storage() {
  static std::atomic<int> cap{0};  // 0 = not set, use environment / hardware
  return cap;
}
inline bool& in_worker() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

// Upper bound on worker threads. MMDEST_THREADS overrides the hardware count;
// set_thread_cap overrides both.
inline int thread_cap() {
  const int set = detail::thread_cap_storage().load();
  if (set > 0) return set;
  if (const char* env = std::getenv("MMDEST_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void set_thread_cap(int n) { detail::thread_cap_storage().store(n > 0 ? n : 0); }

// Runs fn(b) for b in [0, n_tasks). Each task writes only its own slot, so the
// caller can reduce slots in index order for thread-count independent results.
// Nested calls run serially on the calling worker.
template <class Fn>
void parallel_for(long n_tasks, Fn&& fn) {
  if (n_tasks <= 0) return;
  const long workers = detail::in_worker() ? 1 : std::min<long>(thread_cap(), n_tasks);
  if (workers <= 1) {
    for (long b = 0; b < n_tasks; ++b) fn(b);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&] {
    const bool was = detail::in_worker();
    detail::in_worker() = true;
    for (long b = next.fetch_add(1); b < n_tasks; b = next.fetch_add(1)) {
      try {
        fn(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
    detail::in_worker() = was;
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (long t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace mmdest

#endif  // MMDEST_PARALLEL_HPP_
