// Copyright 2026 The bgrid Authors.
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

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bgrid {

/// Resolves a requested worker count; 0 means one per hardware thread.
inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs fn(begin, end) over [0, count) split into contiguous blocks, one per
/// worker. The first exception thrown by any block is rethrown.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (count == 0) return;
  const std::size_t n =
      std::min<std::size_t>(resolve_workers(workers), count);
  if (n <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&](std::size_t begin, std::size_t end) {
    try {
      fn(begin, end);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(n - 1);
  const std::size_t block = count / n;
  const std::size_t extra = count % n;
  std::size_t begin = 0;
  std::size_t first_end = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t end = begin + block + (i < extra ? 1 : 0);
    if (i == 0) {
      first_end = end;
    } else {
      threads.emplace_back(run, begin, end);
    }
    begin = end;
  }
  run(0, first_end);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

/// Runs fn(task) for every task index in [0, tasks), distributing tasks over
/// workers. Which worker runs a task never affects what the task computes.
template <class Fn>
void parallel_tasks(std::size_t tasks, unsigned workers, Fn&& fn) {
  parallel_for(tasks, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) fn(t);
  });
}

}  // namespace bgrid
