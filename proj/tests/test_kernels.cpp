#include "volterra/kernels.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "volterra/laplace.hpp"

using namespace volterra;
using C = std::complex<double>;
namespace {
constexpr double pi = std::numbers::pi;
const SectorGrid grid = SectorGrid::half_plane(0.5);
}  // namespace

TEST_CASE("builtin transforms at reference points") {
  const auto one = builtin_kernel("constant_one");
  CHECK(std::abs(one.laplace(C(3.0)) - C(1.0 / 3.0)) < 1e-15);

  const auto half = builtin_kernel("fractional_power", {{"beta", 0.5}});
  CHECK(std::abs(half.laplace(C(4.0)) - C(0.5)) < 1e-15);

  const auto dist = builtin_kernel("distributed_order",
                                   {{"alpha", 0.2}, {"beta", 0.9}, {"omega", 1.0}});
  CHECK(std::abs(dist.laplace(C(1.0)) - C(0.5)) < 1e-15);
  CHECK(dist.singularity_exponent == Catch::Approx(0.1).margin(1e-12));
}

TEST_CASE("builtin parameter domain errors") {
  CHECK_THROWS_AS(builtin_kernel("fractional_power", {{"beta", 1.5}}), std::domain_error);
  CHECK_THROWS_AS(builtin_kernel("fractional_power", {{"beta", 0.0}}), std::domain_error);
  CHECK_THROWS_AS(
      builtin_kernel("distributed_order", {{"alpha", 0.5}, {"beta", 0.9}, {"omega", 1.0}}),
      std::domain_error);
  CHECK_THROWS_AS(
      builtin_kernel("distributed_order", {{"alpha", 0.2}, {"beta", 0.9}, {"omega", -1.0}}),
      std::domain_error);
  CHECK_THROWS_AS(builtin_kernel("nope"), std::domain_error);
  CHECK_THROWS_AS(builtin_kernel("fractional_power"), std::domain_error);
}

TEST_CASE("regularity constants of the closed forms") {
  const auto one = builtin_kernel("constant_one");
  CHECK(regularity_constant(one, 1, grid) == Catch::Approx(1.0).epsilon(1e-12));

  for (double beta : {1.0 / 3.0, 0.5, 0.9}) {
    const auto frac = builtin_kernel("fractional_power", {{"beta", beta}});
    CHECK(regularity_constant(frac, 1, grid) == Catch::Approx(beta).epsilon(1e-10));
  }
}

TEST_CASE("regularity constant of the distributed-order kernel stabilises") {
  // Dense-grid supremum, refined twice; the value must settle within 1%.
  const auto dist = builtin_kernel("distributed_order",
                                   {{"alpha", 0.2}, {"beta", 0.9}, {"omega", 1.0}});
  const SectorGrid g0 = SectorGrid::make(1e-6, 1e6, 400, pi / 2, 401, 1e-3);
  const double r0 = regularity_constant(dist, 1, g0);
  const SectorGrid g1 = g0.refined();
  const double r1 = regularity_constant(dist, 1, g1);
  const double r2 = regularity_constant(dist, 1, g1.refined());
  CHECK(r0 > 0);
  CHECK(std::abs(r1 - r0) <= 0.01 * r0);
  CHECK(std::abs(r2 - r1) <= 0.01 * r1);
  CHECK(r2 >= r1);  // supremum over a superset
  CHECK(r1 >= r0);
}

TEST_CASE("missing derivative raises") {
  auto k = builtin_kernel("constant_one");
  k.laplace_d2 = nullptr;
  CHECK_THROWS_AS(regularity_constant(k, 2, grid), std::domain_error);
}

TEST_CASE("sectorial angles") {
  bool boundary = false;
  const auto one = builtin_kernel("constant_one");
  const double a1 = sectorial_angle(one, grid, &boundary);
  CHECK(a1 == Catch::Approx(pi / 2 - grid.margin).epsilon(1e-10));
  CHECK(boundary);

  const auto half = builtin_kernel("fractional_power", {{"beta", 0.5}});
  const double a2 = sectorial_angle(half, grid, &boundary);
  CHECK(a2 == Catch::Approx(0.5 * (pi / 2 - grid.margin)).epsilon(1e-10));

  const auto dist = builtin_kernel("distributed_order",
                                   {{"alpha", 0.2}, {"beta", 0.9}, {"omega", 1.0}});
  const double a3 = sectorial_angle(dist, grid);
  CHECK(a3 <= 0.45 * pi);
  CHECK(a3 < pi / 2);
  // monotone under refinement
  CHECK(sectorial_angle(dist, grid.refined()) >= a3);
}

TEST_CASE("growth lower bound") {
  const auto one = builtin_kernel("constant_one");
  const auto [c1, p1] = growth_lower_bound(one, pi / 2, grid);
  CHECK(c1 == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(p1);

  for (double beta : {1.0 / 3.0, 0.5}) {
    const auto frac = builtin_kernel("fractional_power", {{"beta", beta}});
    const auto [c, p] = growth_lower_bound(frac, beta * pi / 2, grid);
    CHECK(c == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(p);
  }

  const auto dist = builtin_kernel("distributed_order",
                                   {{"alpha", 0.2}, {"beta", 0.9}, {"omega", 1.0}});
  const double theta = sectorial_angle(dist, grid);
  const auto [c, p] = growth_lower_bound(dist, theta, grid);
  CHECK(c > 0);
  CHECK(p);
}

TEST_CASE("sector inequality constant against the analytic bound") {
  for (double theta : {pi / 3, pi / 2, 2 * pi / 3}) {
    const auto g = sector_grid_for_inequality(theta, 0.5);
    const double sup = sector_inequality_constant(theta, g);
    CHECK(sup <= 1.0 / std::sin(theta / 2) + 1e-9);
    CHECK(sup >= 1.0);  // attained on the positive real axis
  }
  // theta = pi/2 on the imaginary boundary: (1+R)/sqrt(1+R^2) -> 1
  const double r = 1e6;
  CHECK((1.0 + r) / std::abs(C(1.0, r)) == Catch::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("parabolicity verdicts") {
  std::vector<C> evs;
  for (int n = 1; n <= 8; ++n) evs.push_back(C(-double(n), 0.0));

  const auto one = builtin_kernel("constant_one");
  CHECK(parabolicity_check(one, evs, 0.01, grid));

  const auto frac = builtin_kernel("fractional_power", {{"beta", 0.9}});
  CHECK(parabolicity_check(frac, evs, pi / 2 - 0.1, grid));

  // Angle sum at or above pi fails the sufficient criterion.
  CHECK_FALSE(parabolicity_check(one, evs, pi / 2 + 0.1, grid));
}

TEST_CASE("transform conjugation symmetry on the grid") {
  for (const char* name : {"constant_one", "fractional_power", "distributed_order"}) {
    std::map<std::string, double> p;
    if (std::string(name) == "fractional_power") p = {{"beta", 0.5}};
    if (std::string(name) == "distributed_order")
      p = {{"alpha", 0.2}, {"beta", 0.9}, {"omega", 1.0}};
    const auto k = builtin_kernel(name, p);
    grid.for_each([&](C s) {
      CHECK(std::abs(k.laplace(std::conj(s)) - std::conj(k.laplace(s))) <=
            1e-13 * std::max(1.0, std::abs(k.laplace(s))));
    });
  }
}

TEST_CASE("time domain and transform are consistent") {
  // forward transform of a(t) reproduces a_hat on a spread of points
  const auto check_kernel = [&](const KernelSpec& k, double tol) {
    int i = 0;
    for (double m : {0.5, 1.0, 2.0, 5.0}) {
      for (double phi : {-0.6, 0.0, 0.9}) {
        const C s = std::polar(m, phi);
        const C want = k.laplace(s);
        const C got = forward_laplace(k.time_domain, s, 1e-8);
        CHECK(std::abs(got - want) <= tol * std::abs(want));
        ++i;
      }
    }
    CHECK(i >= 10);
  };
  check_kernel(builtin_kernel("constant_one"), 1e-7);
  check_kernel(builtin_kernel("fractional_power", {{"beta", 0.5}}), 1e-6);
  check_kernel(builtin_kernel("fractional_power", {{"beta", 1.0 / 3.0}}), 1e-5);
  check_kernel(builtin_kernel("distributed_order",
                              {{"alpha", 0.2}, {"beta", 0.9}, {"omega", 1.0}}),
               1e-5);
}

TEST_CASE("antiderivative fields match the kernel") {
  // d/dx of the antiderivative recovers a(x); second one recovers the first.
  for (const char* name : {"fractional_power", "distributed_order"}) {
    std::map<std::string, double> p;
    if (std::string(name) == "fractional_power")
      p = {{"beta", 0.5}};
    else
      p = {{"alpha", 0.2}, {"beta", 0.9}, {"omega", 1.0}};
    const auto k = builtin_kernel(name, p);
    for (double x : {0.2, 1.0, 3.0}) {
      const double h = 1e-5 * x;
      const double d1 = (k.time_antideriv(x + h) - k.time_antideriv(x - h)) / (2 * h);
      CHECK(d1 == Catch::Approx(k.time_domain(x)).epsilon(1e-7));
      const double d2 = (k.time_antideriv2(x + h) - k.time_antideriv2(x - h)) / (2 * h);
      CHECK(d2 == Catch::Approx(k.time_antideriv(x)).epsilon(1e-7));
    }
  }
}

TEST_CASE("full certification of the builtins") {
  const auto one = builtin_kernel("constant_one");
  auto c1 = certify_kernel(one, grid);
  CHECK(c1.pass_flags.at("regular"));
  CHECK_FALSE(c1.pass_flags.at("sectorial_below_half_pi"));  // angle reaches pi/2
  CHECK(c1.angle_on_boundary);

  const auto half = builtin_kernel("fractional_power", {{"beta", 0.5}});
  auto c2 = certify_kernel(half, grid);
  CHECK(c2.pass_flags.at("regular"));
  CHECK(c2.pass_flags.at("sectorial_below_half_pi"));
  CHECK(c2.sector_angle_extrapolated == Catch::Approx(pi / 4).epsilon(1e-6));

  const auto dist = builtin_kernel("distributed_order",
                                   {{"alpha", 0.2}, {"beta", 0.9}, {"omega", 1.0}});
  auto c3 = certify_kernel(dist, grid);
  CHECK(c3.pass_flags.at("regular"));
  CHECK(c3.pass_flags.at("sectorial_below_half_pi"));
  CHECK(c3.pass_flags.at("growth_bound"));
  CHECK(c3.pass_flags.at("real_kernel_symmetry"));
  CHECK(c3.pass_flags.at("transform_nonzero"));
}

TEST_CASE("sector grid refinement is a superset") {
  const auto g = SectorGrid::make(0.1, 10.0, 5, pi / 2, 5, 1e-3);
  const auto r = g.refined();
  for (double m : g.moduli)
    CHECK(std::find_if(r.moduli.begin(), r.moduli.end(),
                       [&](double x) { return std::abs(x - m) < 1e-15 * m; }) != r.moduli.end());
  for (double a : g.arguments)
    CHECK(std::find_if(r.arguments.begin(), r.arguments.end(),
                       [&](double x) { return std::abs(x - a) < 1e-14; }) != r.arguments.end());
  CHECK(r.moduli.size() == 2 * g.moduli.size() - 1);
  CHECK(r.arguments.size() == 2 * g.arguments.size() - 1);
}
