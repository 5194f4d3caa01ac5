#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "volterra/quadrature.hpp"

namespace volterra {

/// Requested accuracy was not reached; carries the achieved error estimate.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_error(achieved) {}
  double achieved_error;
};

/// The integrand failed to stabilise under repeated enlargement of the
/// integration window (transform does not decay along vertical lines).
class NonDecayError : public std::runtime_error {
 public:
  NonDecayError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_error(achieved) {}
  double achieved_error;
};

/// Vertical-line contour for inverse Laplace integration.
struct ContourSpec {
  double abscissa;     // real part of the integration line
  double half_height;  // initial truncation of the imaginary range
  int nodes;           // initial trapezoid nodes per oscillation panel

  ContourSpec(double eps, double h, int n) : abscissa(eps), half_height(h), nodes(n) {
    if (!(abscissa > 0) || !(half_height > 0) || nodes < 16)
      throw std::domain_error("ContourSpec: need abscissa>0, half_height>0, nodes>=16");
  }

  // Default line for time t: abscissa exactly 1/t.
  static ContourSpec default_for(double t) {
    return ContourSpec(1.0 / t, 16.0 * std::numbers::pi / t, 32);
  }
};

/// Forward transform: integral of e^{-lambda t} f(t) over t > 0.
///
/// An integrable singularity f ~ t^{-rho} (rho < 1) at the origin is handled
/// by the power substitution t = u^8 plus geometrically graded panels, so no
/// singularity order needs to be supplied.
inline std::complex<double> forward_laplace(const std::function<double(double)>& f,
                                            std::complex<double> lambda, double tol = 1e-8) {
  using C = std::complex<double>;
  if (!(lambda.real() > 0)) throw std::domain_error("forward_laplace: Re lambda must be positive");

  const double h = std::min(1.0, 1.0 / lambda.real());
  C total{};
  double err_total = 0;

  // Head on [0, h] via t = u^q. GK nodes stay interior, so f is never
  // evaluated at t = 0.
  constexpr double q = 8.0;
  auto head = [&](double u) -> C {
    const double t = std::pow(u, q);
    return q * std::pow(u, q - 1.0) * f(t) * std::exp(-lambda * t);
  };
  const double u_h = std::pow(h, 1.0 / q);
  double hi = u_h;
  for (int j = 0; j < 40; ++j) {
    const double lo = hi / 2;
    double e = 0;
    const C piece = quad::adaptive_gk<double>(head, lo, hi, tol / 64, e, 1e-13, 10);
    total += piece;
    err_total += e;
    hi = lo;
    if (std::abs(piece) + e < 1e-18 + 1e-17 * std::abs(total)) break;
  }

  // Tail on [h, infinity) in doubling panels until e^{-Re lambda t} wipes it
  // out. Sub-exponential growth of f is the caller contract.
  auto tail = [&](double t) -> C { return f(t) * std::exp(-lambda * t); };
  double lo = h;
  for (int k = 0; k < 80; ++k) {
    const double up = lo * 2;
    double e = 0;
    const C piece = quad::adaptive_gk<double>(tail, lo, up, tol / 64, e, 1e-13, 12);
    total += piece;
    err_total += e;
    lo = up;
    if (std::abs(piece) + e < 1e-18 + 1e-16 * std::abs(total) &&
        lambda.real() * lo > 36.0)
      break;
  }

  if (err_total > tol)
    throw AccuracyError("forward_laplace: requested tolerance not reached", err_total);
  return total;
}

namespace detail {

// Bromwich integral on the vertical line Re lambda = abscissa. Panels of one
// half-oscillation are integrated by node-doubling trapezoid sums; the panel
// series is accelerated with Wynn's epsilon algorithm, which makes the slowly
// decaying oscillatory tails converge. Templated so the scalar solver can run
// the same contour in extended precision.
template <class Real, class F>
std::complex<Real> bromwich_impl(F&& transform, Real t, Real abscissa, Real init_height,
                                 int nodes, Real tol, Real* err_out = nullptr) {
  using C = std::complex<Real>;
  const Real pi = std::numbers::pi_v<Real>;
  const Real eps = abscissa;
  const Real L = pi / t;  // half oscillation of e^{iyt}

  auto pair_integrand = [&](Real y) -> C {
    const C up = std::exp(C(eps, y) * t) * transform(C(eps, y));
    const C dn = std::exp(C(eps, -y) * t) * transform(C(eps, -y));
    return up + dn;
  };

  quad::WynnEpsilon<C> accel;
  C partial{};
  Real quad_err = 0;
  C best{};
  Real best_change = std::numeric_limits<Real>::infinity();
  int stable = 0;
  int small_run = 0;  // consecutive panels below the tolerance scale
  Real mass_head = 0;  // integrand mass over the first panels
  Real mass_now = 0;

  long k = 0;
  long limit = std::max<long>(6, static_cast<long>(std::ceil(init_height / L)));
  for (int doubling = 0; doubling <= 8; ++doubling) {
    for (; k < limit; ++k) {
      Real e = 0;
      Real mass = 0;
      const C piece = quad::trapezoid_refined<Real>(pair_integrand, k * L, (k + 1) * L, nodes,
                                                    tol / 64, e, 10, &mass);
      partial += piece;
      quad_err += e;
      if (k < 3) mass_head = std::max(mass_head, mass);
      mass_now = mass;
      accel.push(partial);
      small_run = (std::abs(piece) <= tol / 8) ? small_run + 1 : 0;
      if (k >= 5) {
        // A settled sum only counts once the integrand itself decays; a flat
        // envelope means the transform has no pointwise inverse on the line.
        const bool decayed = mass_now <= Real(0.7) * mass_head || mass_now * L <= tol;
        // Plainly convergent tail: take the raw sum. Feeding roundoff-level
        // increments to the epsilon table only breeds spurious huge entries.
        if (small_run >= 3 && decayed) {
          if (err_out) *err_out = (3 * std::abs(piece) + quad_err) / (2 * pi);
          return partial / (2 * pi);
        }
        const C est = accel.estimate();
        const Real change = std::abs(est - best);
        best = est;
        best_change = change;
        stable = (change < tol / 2) ? stable + 1 : 0;
        if (stable >= 3 && decayed) {
          if (err_out) *err_out = change + quad_err / (2 * pi);
          return best / (2 * pi);
        }
      }
    }
    limit *= 2;
  }
  const Real achieved = best_change + quad_err / (2 * pi);
  throw NonDecayError("bromwich_invert: tail failed to stabilise within the window budget",
                      static_cast<double>(achieved));
}

}  // namespace detail

/// Inverse Laplace transform (1/2 pi i) * integral of e^{lambda t} F(lambda)
/// along the vertical line Re lambda = abscissa (default 1/t).
inline std::complex<double> bromwich_invert(
    const std::function<std::complex<double>(std::complex<double>)>& transform, double t,
    const ContourSpec& contour, double tol = 1e-8) {
  if (!(t > 0)) throw std::domain_error("bromwich_invert: t must be positive");
  return detail::bromwich_impl<double>(transform, t, contour.abscissa, contour.half_height,
                                       contour.nodes, tol);
}

inline std::complex<double> bromwich_invert(
    const std::function<std::complex<double>(std::complex<double>)>& transform, double t,
    double tol = 1e-8) {
  if (!(t > 0)) throw std::domain_error("bromwich_invert: t must be positive");
  return bromwich_invert(transform, t, ContourSpec::default_for(t), tol);
}

}  // namespace volterra
