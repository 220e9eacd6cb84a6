#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "densel/distribution.hpp"

namespace densel {

/// Uniform draw from the probability simplex on [n] (Dirichlet(1, ..., 1)).
Distribution random_distribution(std::size_t n, Rng& rng);

/// E[Z1] = s T + s^2 ||p_L - v_L||^2 with T = p(L), L = support of vL.
double z1_expectation(const Distribution& p, const RestrictedVector& vL, double s);

/// 4 s^3 ||p_L|| ||p_L - v_L||^2 + 6 s^2 ||p_L||^2 + s T.
double z1_variance_bound(const Distribution& p, const RestrictedVector& vL, double s);

struct Z1Stats {
  std::size_t draws = 0;
  double mean = 0;
  double variance = 0;  // unbiased sample variance
  double std_error = 0;
  double expected = 0;
  double variance_bound = 0;
};

/// Monte-Carlo of Z1 with independent counts X(i) ~ Pois(s p(i)).
Z1Stats z1_monte_carlo(const Distribution& p, const RestrictedVector& vL, double s,
                       std::size_t draws, std::uint64_t seed);

struct Z1Instance {
  Distribution p;
  RestrictedVector vL;
  double s = 0;
};

/// Random instances: n in [4, 64], p and v uniform on the simplex, L a
/// random non-empty subset, s in [20, 400].
std::vector<Z1Instance> random_z1_instances(std::size_t count, std::uint64_t seed);

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Statistical property suites: "light-stat" (Z1 mean and variance, alias "appendix-c"),
/// "scheffe" (two-hypothesis guarantee), "ops" (op accounting),
/// "adversarial" (naive empirical nearest-neighbor failures).
std::vector<CheckLine> run_verify_suite(const std::string& suite, std::size_t trials,
                                        std::uint64_t seed, std::size_t threads = 1);
std::vector<std::string> verify_suites();

}  // namespace densel
