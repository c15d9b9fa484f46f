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

#include <utility>
#include <vector>

#include "fadecap/bounds.hpp"
#include "fadecap/model.hpp"

namespace fadecap {

enum class ConstantKind { mmse_lb, mmse_ub, mi_lb, mi_ub, pe_lb, pe_ub };

// k_{LB,n}, k_{UB,n}, k'_{LB,n}, k'_{UB,n}, k''_{LB,n}, k''_{UB,n}.
double expansion_constant(ConstantKind kind, int n, int M);

// The alternative closed forms with Gamma(n+1/2) in the denominator. They do
// not match their own integral definitions; kept so the discrepancy can be
// reported. Only mmse_* and mi_* kinds.
double alternative_constant(ConstantKind kind, int n, int M);

struct Eigenweight {
  double lambda;
  int multiplicity;
};

struct ZeroBehaviour {
  int order;     // first non-vanishing derivative at zero
  double value;  // that derivative
};

// Density of sum_m lambda_m G_m with G_m ~ Gamma(multiplicity_m, 1), i.e. the
// law with Laplace transform prod (1 + lambda s)^-mu.
ZeroBehaviour pdf_zero_derivative_weighted(const std::vector<Eigenweight>& eig);
// p^{(order + k)}(0) for k = 0 .. terms-1.
std::vector<double> pdf_zero_taylor(const std::vector<Eigenweight>& eig, int terms);

struct PairEntry {
  int i;
  int j;
  int order;
  double value;
};

struct DistanceDistribution {
  int M = 0;
  std::vector<PairEntry> pairs;  // ordered pairs with d_ij^2 not identically zero
  std::vector<std::pair<int, int>> excluded;
  double effective_logM = 0.0;
};

DistanceDistribution distance_dist_rayleigh(const Constellation& c, int n_r);
DistanceDistribution distance_dist_correlated(const Constellation& c, const CMatrix& theta_t, const CMatrix& theta_r);
DistanceDistribution distance_dist_ricean(const Constellation& c, double K, const CVector& a_t, const CVector& a_r,
                                          int n_r);
DistanceDistribution distance_dist_spacetime(const SpaceTimeCode& code, int n_r);
DistanceDistribution distance_dist(const ChannelModel& m, const Constellation& c);

int diversity_order(const DistanceDistribution& dd);

struct ExpansionBounds {
  int d = 0;
  int M = 0;
  double sumS = 0.0;
  BoundPair mi;    // bounds on eps'_d
  BoundPair mmse;  // bounds on eps_d
  BoundPair pe;
  double logM_limit = 0.0;
};

ExpansionBounds epsilon_bounds(const DistanceDistribution& dd, int M);

struct ExpansionCurves {
  std::vector<double> snr;
  std::vector<double> mi_lb, mi_ub;
  std::vector<double> mmse_lb, mmse_ub;
  std::vector<double> pe_lb, pe_ub;
};

ExpansionCurves evaluate_expansion(const ExpansionBounds& eb, const SnrGrid& grid);

struct SnrOffsets {
  double mmse_lb;  // dB
  double mmse_ub;
  double mi_lb;
  double mi_ub;
};

SnrOffsets snr_offsets(const ExpansionBounds& eb, double eps, double eps_prime);
double mmse_offset_spread_db(int M, int d);
double mi_offset_spread_db(int M, int d);

}  // namespace fadecap
