#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "oracles.hpp"

// A single-component fit of one entry has a posterior mean curve that can be
// computed by quadrature over the two variances; the chain must agree.
TEST_CASE("single-component posterior mean matches quadrature") {
  const oracle::ConjugateCheck check = oracle::conjugate_check(42000, 2718);
  std::printf("conjugate: rms z %.3f, max |z| %.3f\n", check.rms_z(), check.max_abs_z());
  CHECK(check.rms_z() <= 2.0);
  CHECK(check.max_abs_z() <= 4.0);
}

// Joint-distribution test: prior draws against the Gibbs-then-redraw-data chain.
TEST_CASE("Geweke joint distribution test") {
  const auto stats = oracle::geweke_test(200000, 200000, 31);
  for (const auto& s : stats) {
    INFO(s.name << ": prior " << s.marginal_mean << " chain " << s.successive_mean << " z " << s.z());
    CHECK(std::abs(s.z()) < 4.0);
  }
}
