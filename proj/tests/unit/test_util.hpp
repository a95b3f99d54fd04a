// Copyright 2026 The asvvote Authors.
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

#ifndef ASVVOTE_TESTS_UNIT_TEST_UTIL_HPP_
#define ASVVOTE_TESTS_UNIT_TEST_UTIL_HPP_

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace asvvote::testing {

// Fresh empty directory for one test.
inline std::filesystem::path temp_dir(const std::string& name) {
  const char* root = std::getenv("ASVVOTE_TEST_TMP");
  std::filesystem::path dir = root ? std::filesystem::path(root)
                                   : std::filesystem::temp_directory_path() / "asvvote_tests";
  dir /= name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// |a - b| / max(|a|, |b|) when the larger magnitude exceeds `small`,
// else |a - b|.
inline double rel_error(double a, double b, double small = 1e-6) {
  const double m = std::max(std::abs(a), std::abs(b));
  return m > small ? std::abs(a - b) / m : std::abs(a - b);
}

}  // namespace asvvote::testing

#endif  // ASVVOTE_TESTS_UNIT_TEST_UTIL_HPP_
