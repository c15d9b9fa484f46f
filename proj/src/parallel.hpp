// SPDX-License-Identifier: Apache-2.0
//
// fadecap - constrained capacity of MIMO fading channels
// Copyright (C) 2026 The fadecap authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "fadecap/mc.hpp"

namespace fadecap::detail {

// Welford accumulator with Chan's merge; merge order is fixed by the caller.
struct Accumulator {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  void merge(const Accumulator& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    double nn = static_cast<double>(n + o.n);
    double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.n) / nn;
    m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / nn;
    n += o.n;
  }

  Estimate estimate() const {
    Estimate e;
    e.mean = mean;
    e.n_samples = n;
    e.std_error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    return e;
  }
};

inline std::pair<std::size_t, std::size_t> chunk_range(std::size_t total, std::size_t chunks, std::size_t c) {
  return {total * c / chunks, total * (c + 1) / chunks};
}

inline unsigned worker_count(unsigned max_threads, std::size_t chunks) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned t = max_threads == 0 ? hw : max_threads;
  return static_cast<unsigned>(std::min<std::size_t>(t, chunks));
}

// Runs fn(c) for c in [0, chunks) and returns the results in chunk order.
template <class Fn>
auto run_chunks(std::size_t chunks, unsigned max_threads, Fn fn) -> std::vector<decltype(fn(std::size_t{0}))> {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out(chunks);
  unsigned workers = worker_count(max_threads, chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) out[c] = fn(c);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t c = next.fetch_add(1);
        if (c >= chunks) return;
        try {
          out[c] = fn(c);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

inline std::uint64_t channel_stream(std::size_t chunk) { return 2 * static_cast<std::uint64_t>(chunk); }
inline std::uint64_t noise_stream(std::size_t chunk) { return 2 * static_cast<std::uint64_t>(chunk) + 1; }

}  // namespace fadecap::detail
