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

#include <doctest.h>

#include <cmath>

#include "fadecap/bounds.hpp"

using namespace fadecap;

namespace {
const CMatrix one = CMatrix::Ones(1, 1);
}

TEST_CASE("closed-form values for BPSK") {
  auto bpsk = make_constellation(Family::BPSK);
  auto m = mmse_bounds_fixed_h(1.0, one, bpsk);
  CHECK(m.lower == doctest::Approx(0.5 * std::erfc(1.0)).epsilon(1e-14));
  CHECK(m.upper == doctest::Approx(4.0 * m.lower).epsilon(1e-14));
  auto i = mi_bounds_fixed_h(4.0, one, bpsk);
  // (1/M) * 2 ordered pairs * 2 e^{-4}
  CHECK(i.lower == doctest::Approx(std::log(2.0) - 2.0 * std::exp(-4.0)).epsilon(1e-14));
  CHECK(i.lower == doctest::Approx(0.6565).epsilon(1e-4));
  auto p = pe_bounds_fixed_h(1.0, one, bpsk);
  CHECK(p.lower == doctest::Approx(p.upper).epsilon(1e-15));
  CHECK(p.lower == doctest::Approx(0.5 * std::erfc(1.0)).epsilon(1e-14));
}

TEST_CASE("exact ratios hold for random channels") {
  Stream s(13, 0);
  for (Family f : {Family::QPSK, Family::QAM16}) {
    auto c = make_constellation(f, 2);
    const double M = c.size();
    for (int trial = 0; trial < 10; ++trial) {
      CMatrix h(2, 2);
      for (Eigen::Index k = 0; k < 4; ++k) h(k) = s.cn();
      double snr = std::exp(s.normal());
      auto t = received_distance_table(h, c);
      auto m = mmse_bounds(snr, t);
      auto p = pe_bounds(snr, t);
      CHECK(m.upper / m.lower == doctest::Approx(4.0 * (M - 1.0)).epsilon(1e-12));
      CHECK(p.upper / p.lower == doctest::Approx(M - 1.0).epsilon(1e-12));
      auto i = mi_bounds(snr, t);
      CHECK(i.lower <= i.upper);
      CHECK(i.upper <= std::log(M));
    }
  }
}

TEST_CASE("limits and monotonicity") {
  auto c = make_constellation(Family::QPSK);
  auto hi = mi_bounds_fixed_h(1e4, one, c);
  CHECK(hi.lower == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(mmse_bounds_fixed_h(1e4, one, c).upper < 1e-100);
  CHECK(pe_bounds_fixed_h(1e-12, one, c).upper == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(mi_bounds_fixed_h(0.01, one, c).lower < 0.0);  // reported raw

  double pm = 1e9, pp = 1e9, pi = -1e9;
  for (double db = -10; db <= 30; db += 1) {
    double snr = db_to_linear(db);
    auto m = mmse_bounds_fixed_h(snr, one, c);
    auto p = pe_bounds_fixed_h(snr, one, c);
    auto i = mi_bounds_fixed_h(snr, one, c);
    CHECK(m.upper <= pm);
    CHECK(p.upper <= pp);
    CHECK(i.lower >= pi);
    pm = m.upper;
    pp = p.upper;
    pi = i.lower;
  }
}

TEST_CASE("averaged bounds share channel draws") {
  auto c = make_constellation(Family::QPSK);
  McConfig cfg;
  cfg.channel_draws = 5000;
  auto all = avg_bounds_all(10.0, ChannelModel::canonical(1, 1), c, cfg);
  CHECK(all.mmse.upper.mean / all.mmse.lower.mean == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(all.pe.upper.mean / all.pe.lower.mean == doctest::Approx(3.0).epsilon(1e-12));
  auto again = avg_bounds(Quantity::mi, 10.0, ChannelModel::canonical(1, 1), c, cfg);
  CHECK(again.lower.mean == all.mi.lower.mean);
}

TEST_CASE("rayleigh BPSK averaged pe upper bound approaches 0.25 / snr") {
  auto bpsk = make_constellation(Family::BPSK);
  McConfig cfg;
  cfg.channel_draws = 400000;
  const double snr = 1e4;
  auto b = avg_bounds(Quantity::pe, snr, ChannelModel::canonical(1, 1), bpsk, cfg);
  CHECK(std::abs(b.upper.mean * snr - 0.25) <= 3 * b.upper.std_error * snr + 0.25 * 1e-3);
}
