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

#include "fadecap/bounds.hpp"

#include <cmath>

#include "fadecap/error.hpp"
#include "parallel.hpp"

namespace fadecap {

DistanceTable received_distance_table(const CMatrix& h, const Constellation& c) {
  if (h.cols() != c.n_t()) throw InvalidInput("channel columns do not match constellation dimension");
  CMatrix r = h * c.points();
  DistanceTable t;
  t.M = c.size();
  t.d2.reserve(static_cast<std::size_t>(t.M) * (t.M - 1));
  for (int i = 0; i < t.M; ++i)
    for (int j = 0; j < t.M; ++j)
      if (i != j) t.d2.push_back((r.col(i) - r.col(j)).squaredNorm());
  return t;
}

namespace {

// sum over ordered pairs of 0.5 erfc(sqrt(d2 snr / 4)), optionally weighted by d2
double q_sum(double snr, const DistanceTable& t, bool weighted) {
  double s = 0.0;
  for (double d2 : t.d2) {
    double q = 0.5 * std::erfc(std::sqrt(d2 * snr / 4.0));
    s += weighted ? d2 * q : q;
  }
  return s;
}

}  // namespace

BoundPair mmse_bounds(double snr, const DistanceTable& t) {
  const double M = t.M;
  const double s = q_sum(snr, t, true);
  return {s / (4.0 * M * (M - 1.0)), s / M};
}

BoundPair mi_bounds(double snr, const DistanceTable& t) {
  const double M = t.M;
  double e = 0.0;
  for (double d2 : t.d2) e += 2.0 * std::exp(-d2 * snr / 4.0);
  const double q = q_sum(snr, t, false);
  // 1/4 erfc = 1/2 of the 1/2 erfc terms in q
  return {std::log(M) - e / M, std::log(M) - 0.5 * q / (M * (M - 1.0))};
}

BoundPair pe_bounds(double snr, const DistanceTable& t) {
  const double M = t.M;
  const double q = q_sum(snr, t, false);
  return {q / (M * (M - 1.0)), q / M};
}

BoundPair mmse_bounds_fixed_h(double snr, const CMatrix& h, const Constellation& c) {
  return mmse_bounds(snr, received_distance_table(h, c));
}

BoundPair mi_bounds_fixed_h(double snr, const CMatrix& h, const Constellation& c) {
  return mi_bounds(snr, received_distance_table(h, c));
}

BoundPair pe_bounds_fixed_h(double snr, const CMatrix& h, const Constellation& c) {
  return pe_bounds(snr, received_distance_table(h, c));
}

const EstimatePair& AllBoundEstimates::get(Quantity q) const {
  switch (q) {
    case Quantity::mmse: return mmse;
    case Quantity::mi: return mi;
    case Quantity::pe: return pe;
  }
  return mi;
}

AllBoundEstimates avg_bounds_all(double snr, const ChannelSampler& sampler, const Constellation& c,
                                 const McConfig& cfg) {
  if (!(snr > 0.0) || !std::isfinite(snr)) throw InvalidInput("snr must be positive and finite");
  cfg.validate();
  using Acc = detail::Accumulator;
  struct Part {
    Acc v[6];
  };
  auto parts = detail::run_chunks(cfg.parallel_chunks, cfg.max_threads, [&](std::size_t chunk) {
    auto [lo, hi] = detail::chunk_range(cfg.channel_draws, cfg.parallel_chunks, chunk);
    Part p;
    Stream hs(cfg.seed, detail::channel_stream(chunk));
    for (std::size_t n = lo; n < hi; ++n) {
      DistanceTable t = received_distance_table(sampler(hs), c);
      BoundPair a = mmse_bounds(snr, t), b = mi_bounds(snr, t), e = pe_bounds(snr, t);
      p.v[0].add(a.lower);
      p.v[1].add(a.upper);
      p.v[2].add(b.lower);
      p.v[3].add(b.upper);
      p.v[4].add(e.lower);
      p.v[5].add(e.upper);
    }
    return p;
  });
  Part total;
  for (const auto& p : parts)
    for (int k = 0; k < 6; ++k) total.v[k].merge(p.v[k]);
  AllBoundEstimates out;
  out.mmse = {total.v[0].estimate(), total.v[1].estimate()};
  out.mi = {total.v[2].estimate(), total.v[3].estimate()};
  out.pe = {total.v[4].estimate(), total.v[5].estimate()};
  return out;
}

AllBoundEstimates avg_bounds_all(double snr, const ChannelModel& m, const Constellation& c, const McConfig& cfg) {
  if (m.n_t() != c.n_t()) throw InvalidInput("channel n_t does not match constellation n_t");
  return avg_bounds_all(snr, [&m](Stream& s) { return m.sample(s); }, c, cfg);
}

EstimatePair avg_bounds(Quantity q, double snr, const ChannelModel& m, const Constellation& c, const McConfig& cfg) {
  return avg_bounds_all(snr, m, c, cfg).get(q);
}

}  // namespace fadecap
