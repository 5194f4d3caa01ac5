#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "volterra/kernels.hpp"
#include "volterra/laplace.hpp"
#include "volterra/quadrature.hpp"

namespace volterra {

/// Samples of the scalar resolvent s(t, mu), the solution of
///   s(t) + mu * (a * s)(t) = 1.
struct ScalarSolutionGrid {
  std::string kernel_key;
  std::complex<double> mu;
  std::vector<double> t_samples;
  std::vector<std::complex<double>> values;
  std::string method;  // "time_step" or "inversion"
  double error_estimate = 0;
};

/// Samples of the subordination kernel v_t (inverse transform of s(t, .) in
/// the mu variable) together with its quadrature norms.
struct SubordinationKernel {
  std::string kernel_key;
  double t = 0;
  std::vector<double> r_samples;
  std::vector<double> values;
  double l1 = 0;
  double l2 = 0;
  double w11 = 0;
  double error_estimate = 0;
};

namespace detail {

// Product-integration weights for a piecewise-linear unknown: exactness needs
// the first and second repeated antiderivatives of the kernel.
template <class Real>
struct ConvolutionWeights {
  std::vector<Real> m;  // m[j]  = int_0^{j h} a
  std::vector<Real> w;  // w[j]  = (M2(j h) - M2((j-1) h)) / h
  Real h = 0;
};

template <class Real>
ConvolutionWeights<Real> convolution_weights(const KernelSpec& k, Real T, int n) {
  if (!k.time_antideriv || !k.time_antideriv2)
    throw std::domain_error("scalar solver: kernel lacks time-domain moment data");
  ConvolutionWeights<Real> cw;
  cw.h = T / n;
  cw.m.resize(n + 1);
  cw.w.resize(n + 1);
  Real prev_m2 = 0;
  cw.m[0] = 0;
  cw.w[0] = 0;
  for (int j = 1; j <= n; ++j) {
    const Real x = j * cw.h;
    Real m1, m2;
    if constexpr (sizeof(Real) > sizeof(double)) {
      m1 = k.antideriv_ld(x);
      m2 = k.antideriv2_ld(x);
    } else {
      m1 = k.time_antideriv(x);
      m2 = k.time_antideriv2(x);
    }
    cw.m[j] = m1;
    cw.w[j] = (m2 - prev_m2) / cw.h;
    prev_m2 = m2;
  }
  return cw;
}

// One sweep of the implicit product-trapezoid recursion on a uniform mesh.
// Exact whenever the true solution is piecewise linear on the mesh.
template <class Real>
std::vector<std::complex<Real>> scalar_mesh_sweep(const ConvolutionWeights<Real>& cw,
                                                  std::complex<Real> mu, int n) {
  using C = std::complex<Real>;
  std::vector<C> s(n + 1);
  s[0] = Real(1);
  const C pivot = Real(1) + mu * cw.w[1];
  if (std::abs(pivot) < Real(1e-12))
    throw std::domain_error("scalar solver: implicit step is singular (non-parabolic regime)");
  for (int j = 1; j <= n; ++j) {
    C acc = cw.m[j];  // contribution of s0 = 1
    for (int i = 1; i < j; ++i) acc += (s[i] - s[i - 1]) * cw.w[j - i + 1];
    acc -= s[j - 1] * cw.w[1];
    s[j] = (Real(1) - mu * acc) / pivot;
  }
  return s;
}

// Caches the weight tables; the mesh is reused across modes in operator
// sweeps, where the tables dominate the cost for Mittag-Leffler kernels.
template <class Real>
const ConvolutionWeights<Real>& cached_weights(const KernelSpec& k, Real T, int n) {
  static std::unordered_map<std::string, ConvolutionWeights<Real>> cache;
  static std::mutex mtx;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "|T=%.17g|n=%d", static_cast<double>(T), n);
  const std::string key = k.key() + buf;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, convolution_weights<Real>(k, T, n)).first;
  return it->second;
}

}  // namespace detail

/// Raw mesh solution of the scalar equation on [0, T] with n uniform steps.
inline std::vector<std::complex<double>> scalar_solution_mesh(const KernelSpec& k,
                                                              std::complex<double> mu, double T,
                                                              int n) {
  return detail::scalar_mesh_sweep<double>(detail::cached_weights<double>(k, T, n), mu, n);
}

/// Time-stepping oracle for s(t, mu): product integration exact on piecewise
/// linear solutions, step halving for error control, Richardson extrapolation
/// with the kernel-dependent leading error exponent.
inline ScalarSolutionGrid solve_scalar_oracle(const KernelSpec& k, std::complex<double> mu,
                                              const std::vector<double>& t_grid,
                                              double tol = 1e-9, int n_start = 2048) {
  using C = std::complex<double>;
  ScalarSolutionGrid out;
  out.kernel_key = k.key();
  out.mu = mu;
  out.t_samples = t_grid;
  out.method = "time_step";
  out.values.reserve(t_grid.size());

  // Two-level Richardson ladder on halved steps. Leading exponent h^{2-rho}
  // for a kernel with a t^{-rho} weak singularity (then h^2 next), plain
  // h^2 (then h^4) in the smooth case.
  const double rho = k.singularity_exponent;
  const double p1 = rho > 0 ? 2.0 - rho : 2.0;
  const double p2 = rho > 0 ? 2.0 : 4.0;
  const double f1 = std::pow(2.0, p1);
  const double f2 = std::pow(2.0, p2);

  // The ladder runs in extended precision: the convolution recursion keeps
  // O(1) summands alive even when the solution has decayed by many orders,
  // so double accumulation would floor the relative accuracy of small values.
  using LD = long double;
  using CL = std::complex<LD>;
  const CL mu_l(mu.real(), mu.imag());

  for (double t : t_grid) {
    if (!(t > 0)) throw std::domain_error("solve_scalar_oracle: t must be positive");
    if (mu == C(0.0)) {
      out.values.push_back(C(1.0));
      continue;
    }
    int n = n_start;
    auto run = [&](int steps) {
      return detail::scalar_mesh_sweep<LD>(detail::cached_weights<LD>(k, LD(t), steps), mu_l,
                                           steps)
          .back();
    };
    CL s1 = run(n / 4);
    CL s2 = run(n / 2);
    CL value{};
    double err = std::numeric_limits<double>::infinity();
    for (int attempt = 0;; ++attempt) {
      const CL s3 = run(n);
      const CL r1a = (LD(f1) * s2 - s1) / LD(f1 - 1.0);
      const CL r1b = (LD(f1) * s3 - s2) / LD(f1 - 1.0);
      value = (LD(f2) * r1b - r1a) / LD(f2 - 1.0);
      err = static_cast<double>(std::abs(value - r1b));
      if (err <= tol * std::max(1.0, static_cast<double>(std::abs(value)))) break;
      if (attempt >= 5)
        throw ConvergenceError("solve_scalar_oracle: step halving did not converge", err);
      s1 = s2;
      s2 = s3;
      n *= 2;
    }
    out.values.push_back(C(static_cast<double>(value.real()), static_cast<double>(value.imag())));
    out.error_estimate = std::max(out.error_estimate, err);
  }
  return out;
}

/// s(t, mu) by Bromwich inversion of sigma(lambda, mu) =
/// 1 / (lambda (1 + mu a_hat(lambda))) with the default abscissa 1/t.
///
/// `extended` runs the contour in long double, which pushes the cancellation
/// noise floor far enough down to resolve strongly damped values at relative
/// accuracy.
inline std::complex<double> s_via_laplace(const KernelSpec& k, std::complex<double> mu, double t,
                                          double rel_tol = 1e-10, bool extended = true) {
  using C = std::complex<double>;
  if (!(t > 0)) throw std::domain_error("s_via_laplace: t must be positive");
  if (mu == C(0.0)) return C(1.0);

  if (!extended) {
    auto sigma = [&](C s) { return 1.0 / (s * (1.0 + mu * k.laplace(s))); };
    return detail::bromwich_impl<double>(sigma, t, 1.0 / t, 16 * std::numbers::pi / t, 32,
                                         std::max(1e-13, rel_tol * 1e-2));
  }

  using LD = long double;
  using CL = std::complex<LD>;
  const CL mu_l(mu.real(), mu.imag());
  auto sigma = [&](CL s) { return CL(1.0L) / (s * (CL(1.0L) + mu_l * k.hat_ld(s))); };
  const LD t_l = t;
  auto run = [&](LD tol_abs) {
    return detail::bromwich_impl<LD>(sigma, t_l, LD(1) / t_l,
                                     LD(16) * std::numbers::pi_v<LD> / t_l, 32, tol_abs);
  };
  CL v = run(LD(1e-13));
  // Retarget deeply damped values so the tolerance is relative to |s|.
  const LD want = std::max(LD(5e-20), LD(0.3) * rel_tol * std::abs(v));
  if (want < LD(1e-13) && std::abs(v) > 0) v = run(want);
  return C(static_cast<double>(v.real()), static_cast<double>(v.imag()));
}

namespace detail {

// Certified sector angle per kernel, cached; compute_v needs it as a
// hypothesis gate and sweeps call it per t.
inline double cached_sector_angle(const KernelSpec& k, bool* boundary) {
  struct Entry {
    double angle;
    bool on_boundary;
  };
  static std::unordered_map<std::string, Entry> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(k.key());
  if (it == cache.end()) {
    const SectorGrid g = SectorGrid::half_plane(0.35);
    bool b = false;
    const double a = sectorial_angle(k, g, &b);
    const double edge = std::numbers::pi / 2 - g.margin;
    const double extrap = b ? a * (std::numbers::pi / 2) / edge : a;
    it = cache.emplace(k.key(), Entry{extrap, b}).first;
  }
  if (boundary) *boundary = it->second.on_boundary;
  return it->second.angle;
}

}  // namespace detail

/// Default logarithmic r-grid for v_t: [1e-4 t, 50 max(sqrt t, t)] plus r=0.
inline std::vector<double> default_v_grid(double t, int count = 2000) {
  std::vector<double> r;
  r.reserve(count + 1);
  r.push_back(0.0);
  const double lo = 1e-4 * t;
  const double hi = 50.0 * std::max(std::sqrt(t), t);
  const double lr = std::log(hi / lo);
  for (int i = 0; i < count; ++i) r.push_back(lo * std::exp(lr * i / (count - 1)));
  return r;
}

/// Subordination kernel v_t on an r-grid. Uses the kernel-level contour
///   v_t(r) = (1/2 pi i) int e^{lambda t - r / a_hat(lambda)}
///            / (lambda a_hat(lambda)) d lambda,
/// the mu-plane inversion of s(t, .) carried out with the inner inversion in
/// closed form. Requires a kernel angle strictly below pi/2; the borderline
/// case (a == 1) has a point mass instead of a function and is refused.
inline SubordinationKernel compute_v(const KernelSpec& k, double t,
                                     std::vector<double> r_grid = {}, double tol = 1e-8) {
  using C = std::complex<double>;
  if (!(t > 0)) throw std::domain_error("compute_v: t must be positive");
  const double angle = detail::cached_sector_angle(k, nullptr);
  if (!(angle < std::numbers::pi / 2 - 1e-9))
    throw std::domain_error(
        "compute_v: kernel sector angle is not certified below pi/2; "
        "the subordination kernel is not a function in this regime");

  if (r_grid.empty()) r_grid = default_v_grid(t);
  SubordinationKernel out;
  out.kernel_key = k.key();
  out.t = t;
  out.r_samples = r_grid;
  out.values.resize(r_grid.size());

  double imag_leak = 0;
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const double r = r_grid[i];
    auto transform = [&](C s) {
      const C hat = k.laplace(s);
      return std::exp(-r / hat) / (s * hat);
    };
    const C v = detail::bromwich_impl<double>(transform, t, 1.0 / t,
                                              16 * std::numbers::pi / t, 32, tol);
    out.values[i] = v.real();
    imag_leak = std::max(imag_leak, std::abs(v.imag()));
  }
  out.error_estimate = imag_leak + tol;

  // Norms by trapezoid on the (non-uniform) grid.
  const auto& r = out.r_samples;
  const auto& v = out.values;
  double l1 = 0, l2sq = 0, dl1 = 0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double h = r[i + 1] - r[i];
    l1 += 0.5 * h * (std::abs(v[i]) + std::abs(v[i + 1]));
    l2sq += 0.5 * h * (v[i] * v[i] + v[i + 1] * v[i + 1]);
  }
  // derivative by centred differences, one-sided at the ends
  std::vector<double> dv(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i == 0)
      dv[i] = (v[1] - v[0]) / (r[1] - r[0]);
    else if (i + 1 == r.size())
      dv[i] = (v[i] - v[i - 1]) / (r[i] - r[i - 1]);
    else
      dv[i] = (v[i + 1] - v[i - 1]) / (r[i + 1] - r[i - 1]);
  }
  for (std::size_t i = 0; i + 1 < r.size(); ++i)
    dl1 += 0.5 * (r[i + 1] - r[i]) * (std::abs(dv[i]) + std::abs(dv[i + 1]));
  out.l1 = l1;
  out.l2 = std::sqrt(l2sq);
  out.w11 = l1 + dl1;

  // Tail beyond the last sample, bounded by an exponential fit; it goes into
  // the error budget, not the norms.
  const std::size_t m = r.size() - 1;
  if (m >= 2 && std::abs(v[m]) > 0 && std::abs(v[m - 1]) > std::abs(v[m])) {
    const double b = std::log(std::abs(v[m - 1]) / std::abs(v[m])) / (r[m] - r[m - 1]);
    out.error_estimate += std::abs(v[m]) / std::max(b, 1e-12);
  }
  return out;
}

/// Result of a log-log scaling fit of a norm of v_t against t.
struct ScalingFit {
  double slope = 0;
  double r2 = 0;
  bool poor_fit = false;  // r2 below 0.98
};

enum class NormTag { l1, l2, w11 };
enum class Branch { small_t, large_t };

/// Least-squares slope of log(norm of v_t) against log t over the requested
/// branch of the grid (small_t keeps t <= 1, large_t keeps t >= 1).
inline ScalingFit norm_scaling_fit(const KernelSpec& k, NormTag norm,
                                   const std::vector<double>& t_grid, Branch branch,
                                   int r_count = 2000) {
  std::vector<double> ts, ys;
  for (double t : t_grid) {
    if (branch == Branch::small_t && t > 1.0) continue;
    if (branch == Branch::large_t && t < 1.0) continue;
    ts.push_back(t);
  }
  if (ts.size() < 2)
    throw std::domain_error("norm_scaling_fit: too few samples on the requested branch");
  const double decades = std::log10(ts.back() / ts.front());
  if (decades < 2.0 - 1e-9 || double(ts.size() - 1) < 8.0 * decades - 1e-9)
    throw std::domain_error(
        "norm_scaling_fit: need at least two decades with eight samples per decade");
  for (double t : ts) {
    const auto sub = compute_v(k, t, default_v_grid(t, r_count));
    ys.push_back(norm == NormTag::l1 ? sub.l1 : norm == NormTag::l2 ? sub.l2 : sub.w11);
  }
  const auto [slope, r2] = quad::loglog_fit(ts, ys);
  return {slope, r2, r2 < 0.98};
}

/// Growth profile of |mu^gamma s(t, mu)|: per-t suprema over the mu grid and
/// the fitted small-t slope (prediction: -2 gamma theta / pi).
struct GrowthCheck {
  double slope = 0;
  double r2 = 0;
  double expected_slope = 0;
  std::vector<double> sup_constants;
};

inline GrowthCheck s_growth_check(const KernelSpec& k, double gamma,
                                  const std::vector<double>& t_grid, const SectorGrid& mu_grid) {
  using C = std::complex<double>;
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::domain_error("s_growth_check: gamma must lie in [0, 1]");
  GrowthCheck out;
  const double theta = detail::cached_sector_angle(k, nullptr);
  out.expected_slope = -2.0 * gamma * theta / std::numbers::pi;

  const bool real_axis_only =
      mu_grid.arguments.size() == 1 && std::abs(mu_grid.arguments[0]) < 1e-14;

  for (double t : t_grid) {
    double sup = 0;
    double best_mod = mu_grid.moduli.front();
    mu_grid.for_each([&](C mu) {
      const double val =
          std::pow(std::abs(mu), gamma) * std::abs(s_via_laplace(k, mu, t, 1e-8, false));
      if (val > sup) {
        sup = val;
        best_mod = std::abs(mu);
      }
    });
    if (real_axis_only && gamma > 0) {
      // Golden-section polish along the modulus direction around the grid
      // argmax, so the supremum is the calculus maximum, not a grid artefact.
      auto val_at = [&](double lm) {
        const double m = std::exp(lm);
        return std::pow(m, gamma) * std::abs(s_via_laplace(k, C(m), t, 1e-8, false));
      };
      const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
      double a = std::log(best_mod) - 0.7, b = std::log(best_mod) + 0.7;
      double c = b - gr * (b - a), d = a + gr * (b - a);
      double fc = val_at(c), fd = val_at(d);
      for (int it = 0; it < 40 && (b - a) > 1e-9; ++it) {
        if (fc > fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = val_at(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + gr * (b - a);
          fd = val_at(d);
        }
      }
      sup = std::max(sup, std::max(fc, fd));
    }
    out.sup_constants.push_back(sup);
  }

  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] <= 1.0) {
      ts.push_back(t_grid[i]);
      ys.push_back(out.sup_constants[i]);
    }
  }
  if (ts.size() >= 3) {
    const auto [slope, r2] = quad::loglog_fit(ts, ys);
    out.slope = slope;
    out.r2 = r2;
  }
  return out;
}

}  // namespace volterra
