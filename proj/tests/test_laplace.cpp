#include "volterra/laplace.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "volterra/specfun.hpp"

using volterra::bromwich_invert;
using volterra::ContourSpec;
using volterra::forward_laplace;
using C = std::complex<double>;

TEST_CASE("forward transform of elementary functions") {
  auto one = [](double) { return 1.0; };
  auto expm = [](double t) { return std::exp(-t); };
  auto texp = [](double t) { return t * std::exp(-t); };

  CHECK(std::abs(forward_laplace(one, C(2.0)) - C(0.5)) < 1e-8);
  CHECK(std::abs(forward_laplace(expm, C(1.0)) - C(0.5)) < 1e-8);
  CHECK(std::abs(forward_laplace(texp, C(2.0)) - C(1.0 / 9.0)) < 1e-8);
  // complex argument: L[e^{-t}](1+i) = 1/(2+i)
  CHECK(std::abs(forward_laplace(expm, C(1.0, 1.0)) - C(1.0) / C(2.0, 1.0)) < 1e-8);
}

TEST_CASE("forward transform handles an integrable power singularity") {
  // L[t^{-1/2}](lambda) = sqrt(pi/lambda)
  auto f = [](double t) { return 1.0 / std::sqrt(t); };
  for (double x : {0.5, 1.0, 3.0}) {
    const double want = std::sqrt(std::numbers::pi / x);
    CHECK(std::abs(forward_laplace(f, C(x), 1e-9) - C(want)) < 1e-8 * want);
  }
  // and a harder exponent, t^{-0.8}: L = Gamma(0.2) lambda^{-0.2}
  auto g = [](double t) { return std::pow(t, -0.8); };
  const double want = std::exp(std::lgamma(0.2));
  CHECK(std::abs(forward_laplace(g, C(1.0), 1e-8) - C(want)) < 1e-6 * want);
}

TEST_CASE("forward transform precondition") {
  auto one = [](double) { return 1.0; };
  CHECK_THROWS_AS(forward_laplace(one, C(-1.0, 2.0)), std::domain_error);
}

TEST_CASE("bromwich inversion of elementary transforms") {
  auto inv_heaviside = bromwich_invert([](C s) { return 1.0 / s; }, 1.0);
  CHECK(std::abs(inv_heaviside - C(1.0)) < 1e-8);

  auto inv_exp = bromwich_invert([](C s) { return 1.0 / (s + 1.0); }, 1.0);
  CHECK(std::abs(inv_exp - C(std::exp(-1.0))) < 1e-8);

  // sigma(lambda, mu) with a == 1 collapses to 1/(lambda + mu)
  const double mu = 2.0;
  auto inv_sigma = bromwich_invert([&](C s) { return 1.0 / (s * (1.0 + mu / s)); }, 0.5);
  CHECK(std::abs(inv_sigma - C(std::exp(-1.0))) < 1e-8);

  // t ramp: L^{-1}[1/s^2](t) = t
  auto ramp = bromwich_invert([](C s) { return 1.0 / (s * s); }, 3.0);
  CHECK(std::abs(ramp - C(3.0)) < 1e-7);
}

TEST_CASE("default contour abscissa equals 1/t exactly") {
  for (double t : {0.1, 1.0, 1.7, 10.0}) {
    CHECK(ContourSpec::default_for(t).abscissa == 1.0 / t);
  }
}

TEST_CASE("contour spec invariants") {
  CHECK_THROWS_AS(ContourSpec(0.0, 1.0, 32), std::domain_error);
  CHECK_THROWS_AS(ContourSpec(1.0, -1.0, 32), std::domain_error);
  CHECK_THROWS_AS(ContourSpec(1.0, 1.0, 8), std::domain_error);
}

TEST_CASE("round trip through both transforms") {
  auto expm = [](double t) { return std::exp(-t); };
  auto texp = [](double t) { return t * std::exp(-t); };
  for (double t : {0.1, 0.5, 2.0, 10.0}) {
    const C back1 = bromwich_invert([&](C s) { return forward_laplace(expm, s, 1e-10); }, t, 1e-8);
    CHECK(std::abs(back1 - C(std::exp(-t))) < 1e-6);
    const C back2 = bromwich_invert([&](C s) { return forward_laplace(texp, s, 1e-10); }, t, 1e-8);
    CHECK(std::abs(back2 - C(t * std::exp(-t))) < 1e-6);
  }
}

TEST_CASE("inversion is linear") {
  auto f1 = [](C s) { return 1.0 / (s + 1.0); };
  auto f2 = [](C s) { return 1.0 / (s * s); };
  const C c1{2.0, 1.0}, c2{-0.5, 0.25};
  const double t = 0.7;
  const C lhs = bromwich_invert([&](C s) { return c1 * f1(s) + c2 * f2(s); }, t);
  const C rhs = c1 * bromwich_invert(f1, t) + c2 * bromwich_invert(f2, t);
  CHECK(std::abs(lhs - rhs) < 1e-8);
}

TEST_CASE("non-decaying transform raises the window error") {
  // A constant transform corresponds to a Dirac mass; the tail never settles.
  CHECK_THROWS_AS(bromwich_invert([](C) { return C(1.0); }, 1.0), volterra::NonDecayError);
}

TEST_CASE("extended precision path recovers strongly damped values") {
  // e^{-mu t} at mu t = 20 sits near the double-precision noise floor of the
  // contour; the long double instantiation must still resolve it.
  using LD = long double;
  using CL = std::complex<long double>;
  const LD t = 10.0L;
  const LD mu = 2.0L;
  auto sigma = [&](CL s) { return CL(1.0L) / (s + mu); };
  const CL got = volterra::detail::bromwich_impl<LD>(sigma, t, LD(1) / t,
                                                     LD(16) * std::numbers::pi_v<LD> / t, 32,
                                                     LD(1e-21));
  const LD want = std::exp(-mu * t);
  CHECK(std::abs(got - CL(want)) < 1e-8L * want);
}
