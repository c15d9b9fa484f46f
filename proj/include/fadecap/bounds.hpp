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

#include <vector>

#include "fadecap/mc.hpp"
#include "fadecap/model.hpp"

namespace fadecap {

struct BoundPair {
  double lower = 0.0;
  double upper = 0.0;
};

// Received-space squared distances over ordered pairs i != j.
struct DistanceTable {
  int M = 0;
  std::vector<double> d2;
};

DistanceTable received_distance_table(const CMatrix& h, const Constellation& c);

BoundPair mmse_bounds(double snr, const DistanceTable& t);
BoundPair mi_bounds(double snr, const DistanceTable& t);  // nats, lower not clamped
BoundPair pe_bounds(double snr, const DistanceTable& t);

BoundPair mmse_bounds_fixed_h(double snr, const CMatrix& h, const Constellation& c);
BoundPair mi_bounds_fixed_h(double snr, const CMatrix& h, const Constellation& c);
BoundPair pe_bounds_fixed_h(double snr, const CMatrix& h, const Constellation& c);

struct EstimatePair {
  Estimate lower;
  Estimate upper;
};

struct AllBoundEstimates {
  EstimatePair mmse;
  EstimatePair mi;
  EstimatePair pe;

  const EstimatePair& get(Quantity q) const;
};

// Averages the fixed-H bounds over cfg.channel_draws channels drawn exactly as
// avg_all draws them.
AllBoundEstimates avg_bounds_all(double snr, const ChannelModel& m, const Constellation& c, const McConfig& cfg);
AllBoundEstimates avg_bounds_all(double snr, const ChannelSampler& sampler, const Constellation& c,
                                 const McConfig& cfg);
EstimatePair avg_bounds(Quantity q, double snr, const ChannelModel& m, const Constellation& c, const McConfig& cfg);

}  // namespace fadecap
