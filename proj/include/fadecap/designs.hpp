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

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fadecap/error.hpp"
#include "fadecap/mc.hpp"
#include "fadecap/model.hpp"

namespace fadecap {

struct RayleighFading {
  double variance;
};

struct RiceanFading {
  cd mean;
  double variance;
};

// y_k = sqrt(snr) h_k sqrt(p_k) x_k + n_k
struct SubchannelSpec {
  Constellation constellation;
  std::variant<RayleighFading, RiceanFading> fading;
};

struct PowerAllocation {
  std::vector<double> p;
  double budget = 0.0;
};

// c_k such that the high-snr bound objective is sum_k c_k / p_k.
std::vector<double> palloc_coefficients(const std::vector<SubchannelSpec>& subs);

PowerAllocation palloc_rayleigh_highsnr(const std::vector<SubchannelSpec>& subs, double budget);
PowerAllocation palloc_ricean_highsnr(const std::vector<SubchannelSpec>& subs, double budget);

struct NumericAllocation {
  PowerAllocation allocation;
  double objective = 0.0;  // sum of MC capacities, nats
  double objective_se = 0.0;
  bool low_confidence = false;
  int evaluations = 0;
};

// Sum of per-subchannel MC capacities at the given powers. Subchannel k uses
// its own streams derived from cfg.seed, fixed across p (common random numbers).
Estimate parallel_capacity(const std::vector<SubchannelSpec>& subs, const std::vector<double>& p, double snr,
                           const McConfig& cfg);
NumericAllocation palloc_numeric(const std::vector<SubchannelSpec>& subs, double budget, double snr,
                                 const McConfig& cfg);

struct Precoder {
  CMatrix P;
  double budget = 0.0;
};

struct PrecoderReport {
  Precoder precoder;
  double objective = 0.0;
  double stationarity_residual = 0.0;
  int iterations = 0;
  bool numeric_path = false;
  // Largest angle (rad) between a left singular vector of P and the nearest
  // eigenspace of theta_t.
  double alignment_angle = 0.0;
};

class PrecoderNotConverged : public NumericError {
 public:
  PrecoderNotConverged(const std::string& what, PrecoderReport best)
      : NumericError(what), best_(std::move(best)) {}
  const PrecoderReport& best() const { return best_; }

 private:
  PrecoderReport best_;
};

// sum_{i != j} (1 / e^H P^H theta_t P e)^{n'} prod_k 1/lambda_k(theta_r), with
// n' the number of positive eigenvalues of theta_r.
double precoder_objective(const Constellation& c, const CMatrix& theta_t, const CMatrix& theta_r, const CMatrix& P);
double precoder_objective(const Constellation& c, int n_r, const CMatrix& P);

PrecoderReport precoder_canonical(const Constellation& c, int n_r, double budget);
PrecoderReport precoder_correlated(const Constellation& c, const CMatrix& theta_t, const CMatrix& theta_r, int n_r,
                                   double budget, int restarts = 4, std::uint64_t seed = 1);
// Single descent from a given start, scaled onto the budget.
PrecoderReport precoder_correlated_from(const Constellation& c, const CMatrix& theta_t, const CMatrix& theta_r,
                                        int n_r, double budget, const CMatrix& start);

double alignment_angle(const CMatrix& P, const CMatrix& theta_t);

struct StCriteria {
  int r_min = 0;
  double criterion = 0.0;
  int d = 0;
  bool extrapolated = false;  // outside n_t = 2, n_r in {1, 2}
};

enum class Ordering { first_better, second_better, equal };

StCriteria st_criteria(const SpaceTimeCode& code, int n_r);
Ordering compare_criteria(const StCriteria& a, const StCriteria& b);
Ordering st_compare(const SpaceTimeCode& a, const SpaceTimeCode& b, int n_r);

}  // namespace fadecap
