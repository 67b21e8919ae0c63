/*
 * Copyright 2026 The TFMN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TFMN_STATS_HPP_
#define TFMN_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "tfmn/error.hpp"

namespace tfmn::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double median(std::vector<double> x) {
  if (x.empty()) throw Error(ErrorKind::kInvalidArgument, "median of empty sample");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
  const double hi = x[mid];
  if (x.size() % 2 == 1) return hi;
  const double lo = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

inline double mean_absolute_error(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size()) throw Error(ErrorKind::kInvalidArgument, "length mismatch");
  double s = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += std::abs(truth[i] - pred[i]);
  return truth.empty() ? 0.0 : s / static_cast<double>(truth.size());
}

struct Correlation {
  double r = 0;
  bool degenerate = false;  // a zero-variance input; r reported as 0
};

// Two-pass Pearson product-moment correlation.
inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::kInvalidArgument, "length mismatch");
  Correlation c;
  if (x.size() < 2) {
    c.degenerate = true;
    return c;
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0;
  double sxx = 0;
  double syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0 || syy <= 0) {
    c.degenerate = true;
    return c;
  }
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return c;
}

// Two-sided p-value of H0: rho = 0 from t = r sqrt((n-2)/(1-r^2)) against
// Student's t with n-2 degrees of freedom. Kept inside (0, 1].
inline double pearson_p_value(double r, std::size_t n) {
  if (n <= 2) return 1.0;
  const double dof = static_cast<double>(n - 2);
  const double r2 = r * r;
  if (r2 >= 1.0) return std::numeric_limits<double>::min();
  const double t = std::abs(r) * std::sqrt(dof / (1.0 - r2));
  const boost::math::students_t dist(dof);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
  return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

}  // namespace tfmn::stats

#endif  // TFMN_STATS_HPP_
