// Copyright 2026 The halypo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "halypo/halypo.hpp"

#include <gtest/gtest.h>

#include <random>

namespace halypo::test {

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index j = 0;
  for (double x : xs) v[j++] = x;
  return v;
}

inline Vector gaussian(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (Index j = 0; j < n; ++j) v[j] = g(rng);
  return v;
}

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline ::testing::AssertionResult vec_near(const ::halypo::Vector& a, const ::halypo::Vector& b,
                                           double tol) {
  if (a.size() != b.size()) {
    return ::testing::AssertionFailure() << "size " << a.size() << " vs " << b.size();
  }
  const double err = a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
  if (err <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "max abs diff " << err << " > " << tol << "\ngot  "
                                       << a.transpose() << "\nwant " << b.transpose();
}
}  // namespace halypo::test

#define EXPECT_VEC_NEAR(a, b, tol) EXPECT_TRUE(::halypo::test::vec_near((a), (b), (tol)))
