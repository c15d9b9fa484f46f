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

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

// I_1(s) = int_s^inf f, I_k(s) = int_s^inf I_{k-1}.
inline double tail_integral(const std::function<double(double)>& f, int k, double s) {
  boost::math::quadrature::exp_sinh<double> es;
  const double inf = std::numeric_limits<double>::infinity();
  if (k == 1) return es.integrate(f, s, inf, 1e-12);
  return es.integrate([&](double t) { return tail_integral(f, k - 1, t); }, s, inf, 1e-11);
}

inline double iterated_tail_integral(const std::function<double(double)>& f, int n) {
  return tail_integral(f, n, 0.0);
}

// Same quantity via Cauchy's formula for repeated integration:
// I_n(0) = int_0^inf t^{n-1} / (n-1)! f(t) dt.
inline double cauchy_tail_integral(const std::function<double(double)>& f, int n) {
  boost::math::quadrature::exp_sinh<double> es;
  const double c = 1.0 / std::tgamma(static_cast<double>(n));
  auto g = [&](double t) {
    const double v = f(t);
    return v == 0.0 ? 0.0 : c * std::pow(t, n - 1) * v;
  };
  return es.integrate(g, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
}

// Partial-fraction density of sum_r lambda_r Gamma(m_r, 1) with distinct
// lambda_r; returns p^{(n)}(0) for n = 0..max_order.
inline std::vector<double> partial_fraction_derivatives(const std::vector<double>& lambda,
                                                        const std::vector<int>& mult, int max_order) {
  const std::size_t R = lambda.size();
  std::vector<double> a(R);
  double scale = 1.0;
  for (std::size_t r = 0; r < R; ++r) {
    a[r] = 1.0 / lambda[r];
    scale *= std::pow(a[r], mult[r]);
  }
  auto binom = [](int n, int k) {
    double b = 1.0;
    for (int q = 1; q <= k; ++q) b = b * (n - k + q) / q;
    return b;
  };
  auto fact = [](int n) { return std::tgamma(n + 1.0); };
  std::vector<double> out(max_order + 1, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    for (int l = 1; l <= mult[r]; ++l) {
      // A_{r,l}: sum over compositions of m_r - l among the other indices.
      const int total = mult[r] - l;
      std::vector<std::size_t> others;
      for (std::size_t k = 0; k < R; ++k)
        if (k != r) others.push_back(k);
      double A = 0.0;
      std::vector<int> kk(others.size(), 0);
      std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
        if (pos == others.size()) {
          if (left != 0) return;
          double term = 1.0;
          for (std::size_t q = 0; q < others.size(); ++q) {
            std::size_t k = others[q];
            term *= std::pow(-1.0, kk[q]) * binom(mult[k] + kk[q] - 1, kk[q]) *
                    std::pow(a[k] - a[r], -(mult[k] + kk[q]));
          }
          A += term;
          return;
        }
        for (int v = 0; v <= left; ++v) {
          kk[pos] = v;
          rec(pos + 1, left - v);
        }
      };
      if (others.empty()) {
        A = total == 0 ? 1.0 : 0.0;
      } else {
        rec(0, total);
      }
      // A x^{l-1} e^{-a x} / (l-1)!  ->  n-th derivative at zero
      for (int n = 0; n <= max_order; ++n) {
        if (n < l - 1) continue;
        int k = n - (l - 1);
        double coef = A / fact(l - 1) * std::pow(-a[r], k) / fact(k);
        out[n] += scale * coef * fact(n);
      }
    }
  }
  return out;
}

// Leading derivative at zero from samples: with F(b) ~ v b^{k+1}/(k+1)!,
// v ~ (k+1)! F(b) / b^{k+1} using the `count` smallest samples.
inline double density_at_zero(std::vector<double> samples, int order, std::size_t count) {
  std::nth_element(samples.begin(), samples.begin() + count, samples.end());
  double b = samples[count];
  double F = static_cast<double>(count) / samples.size();
  return std::tgamma(order + 2.0) * F / std::pow(b, order + 1);
}

// argmin sum c_k / p_k subject to sum p = P by bisection on the multiplier.
inline std::vector<double> waterline(const std::vector<double>& c, double P) {
  auto total = [&](double nu) {
    double s = 0.0;
    for (double ck : c) s += std::sqrt(ck / nu);
    return s;
  };
  double lo = 1e-300, hi = 1.0;
  while (total(hi) > P) hi *= 2.0;
  while (total(lo) < P) lo *= 0.5;
  for (int it = 0; it < 400; ++it) {
    double mid = std::sqrt(lo * hi);
    if (total(mid) > P) lo = mid; else hi = mid;
  }
  std::vector<double> p;
  for (double ck : c) p.push_back(std::sqrt(ck / hi));
  return p;
}

inline double rayleigh_bpsk_pe(double snr) { return 0.5 * (1.0 - std::sqrt(snr / (1.0 + snr))); }

inline double awgn_bpsk_pe(double snr) { return 0.5 * std::erfc(std::sqrt(snr)); }

// E over u ~ N(0, 1/2) of g(u).
inline double gauss_half(const std::function<double(double)>& g) {
  auto f = [&](double u) { return g(u) * std::exp(-u * u) / std::sqrt(std::numbers::pi); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -std::numeric_limits<double>::infinity(),
                                                                       std::numeric_limits<double>::infinity(), 15,
                                                                       1e-12);
}

// BPSK, H = 1, complex noise: log-likelihood ratio 4 snr + 4 sqrt(snr) u.
inline double awgn_bpsk_mi(double snr) {
  return std::log(2.0) - gauss_half([snr](double u) {
           double z = -4.0 * snr - 4.0 * std::sqrt(snr) * u;
           return z > 30 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
         });
}

// log 2 - I for BPSK at H = 1, integrated on |u| <= 7 split where the
// log-likelihood ratio changes sign.
inline double awgn_bpsk_gap(double snr) {
  auto f = [snr](double u) {
    double z = -4.0 * snr - 4.0 * std::sqrt(snr) * u;
    double v = z > 30 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return v * std::exp(-u * u) / std::sqrt(std::numbers::pi);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double knee = std::max(-7.0, -std::sqrt(snr));
  return GK::integrate(f, -7.0, knee, 10, 1e-10) + GK::integrate(f, knee, 7.0, 10, 1e-10);
}

// log 2 - average I for BPSK over 1 x n_r Rayleigh, ||h||^2 ~ Gamma(n_r, 1).
inline double rayleigh_bpsk_gap(double snr, int n_r) {
  const double c = 1.0 / std::tgamma(static_cast<double>(n_r));
  auto f = [&](double x) {
    if (x == 0.0) return n_r == 1 ? std::log(2.0) : 0.0;
    return c * std::pow(x, n_r - 1) * std::exp(-x) * awgn_bpsk_gap(snr * x);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  // geometric breakpoints resolve the layer of width 1/snr near zero
  double total = 0.0, a = 0.0;
  for (double b = std::min(1.0, 1.0 / snr); b < 1.0; a = b, b *= 4.0) total += GK::integrate(f, a, b, 10, 1e-10);
  total += GK::integrate(f, a, 1.0, 10, 1e-10);
  return total + GK::integrate(f, 1.0, std::numeric_limits<double>::infinity(), 10, 1e-10);
}

inline double awgn_bpsk_mmse(double snr) {
  return gauss_half([snr](double u) {
    double t = 1.0 - std::tanh(2.0 * snr + 2.0 * std::sqrt(snr) * u);
    return t * t;
  });
}

}  // namespace oracle
