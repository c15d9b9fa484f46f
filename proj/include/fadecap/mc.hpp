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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "fadecap/model.hpp"

namespace fadecap {

enum class Quantity { mmse, mi, pe };

Quantity parse_quantity(std::string_view name);
std::string_view quantity_name(Quantity q);

// Results are a pure function of everything except max_threads.
struct McConfig {
  std::size_t channel_draws = 1000;
  std::size_t noise_draws_per_channel = 100;
  std::uint64_t seed = 1;
  std::size_t parallel_chunks = 16;
  unsigned max_threads = 0;  // 0: use the hardware concurrency

  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

struct QuantityEstimates {
  Estimate mmse;
  Estimate mi;      // nats
  Estimate mi_gap;  // log M - I, same samples as mi
  Estimate pe;

  const Estimate& get(Quantity q) const;
};

// Fixed channel: noise_draws_per_channel noise realizations, each averaged
// over all M transmitted points. channel_draws is ignored.
QuantityEstimates all_fixed_h(double snr, const CMatrix& h, const Constellation& c, const McConfig& cfg);
Estimate mmse_fixed_h(double snr, const CMatrix& h, const Constellation& c, const McConfig& cfg);
Estimate mi_fixed_h(double snr, const CMatrix& h, const Constellation& c, const McConfig& cfg);
Estimate pe_ml_fixed_h(double snr, const CMatrix& h, const Constellation& c, const McConfig& cfg);

// Channel average. Channel draws depend only on (seed, parallel_chunks,
// channel_draws), so calls that differ only in snr or in the quantity see the
// same channels.
QuantityEstimates avg_all(double snr, const ChannelModel& m, const Constellation& c, const McConfig& cfg);
QuantityEstimates avg_all(double snr, const ChannelModel& m, const SpaceTimeCode& code, const McConfig& cfg);
Estimate avg_quantity(Quantity q, double snr, const ChannelModel& m, const Constellation& c, const McConfig& cfg);

using ChannelSampler = std::function<CMatrix(Stream&)>;
// Generic form: signals are columns, sampler returns the effective channel.
QuantityEstimates avg_all(double snr, const ChannelSampler& sampler, const CMatrix& signals, const McConfig& cfg);

// Per-channel means of log M - I(snr; H), in draw order, for the same channel
// and noise draws avg_all would use.
std::vector<double> per_channel_gap(double snr, const ChannelSampler& sampler, const CMatrix& signals,
                                    const McConfig& cfg);

struct ScaledPoint {
  double snr = 0.0;
  Estimate scaled;
  bool flagged = false;  // std_error above 20% of the scaled value
};

struct EpsilonSeries {
  std::vector<ScaledPoint> leading;
  // snr^{d+1} (gap - eps_d / snr^d) with eps_d taken from the last grid point;
  // the mmse series uses one more power of snr in both terms.
  std::vector<ScaledPoint> second_order;
  bool any_flagged = false;
};

// mmse: snr^{d+1} mmse, mi: snr^d (logM_limit - I), pe: snr^d pe.
EpsilonSeries empirical_epsilon(Quantity q, const SnrGrid& grid, const ChannelModel& m, const Constellation& c,
                                const McConfig& cfg, int d,
                                double logM_limit = std::numeric_limits<double>::quiet_NaN());

// Inner sample size that keeps the relative error of a capacity gap bounded.
std::size_t suggested_noise_draws(double predicted_gap);

}  // namespace fadecap
