#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "volterra/scalar_volterra.hpp"

namespace volterra {

/// Coordinates of a state in the eigenbasis.
struct StateVector {
  std::vector<std::complex<double>> coeffs;

  double norm() const {
    double s = 0;
    for (const auto& c : coeffs) s += std::norm(c);
    return std::sqrt(s);
  }
};

/// Truncated diagonal model: eigenvalues inside -Sigma_omega with a strictly
/// negative real-part ceiling, scalar observation row c_n.
struct DiagonalSystem {
  std::vector<std::complex<double>> eigenvalues;
  std::vector<std::complex<double>> obs_coeffs;
  double sector_angle = 0;      // omega
  double stability_margin = 0;  // eta0 = -max Re lambda_n
  double obs_bound = 0;         // max |c_n| / (1 + |lambda_n|)
  StateVector initial_state;

  DiagonalSystem(std::vector<std::complex<double>> evs, std::vector<std::complex<double>> cs,
                 double omega, StateVector x0 = {})
      : eigenvalues(std::move(evs)), obs_coeffs(std::move(cs)), sector_angle(omega),
        initial_state(std::move(x0)) {
    if (eigenvalues.empty() || eigenvalues.size() != obs_coeffs.size())
      throw std::domain_error("DiagonalSystem: need matching non-empty spectra and coefficients");
    if (!(omega > 0 && omega < std::numbers::pi))
      throw std::domain_error("DiagonalSystem: sector angle must lie in (0, pi)");
    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eigenvalues) {
      if (!(ev.real() < 0))
        throw std::domain_error("DiagonalSystem: eigenvalues must have negative real part");
      if (std::abs(std::arg(-ev)) >= omega)
        throw std::domain_error("DiagonalSystem: eigenvalue outside -Sigma_omega");
      max_re = std::max(max_re, ev.real());
    }
    stability_margin = -max_re;
    for (std::size_t n = 0; n < obs_coeffs.size(); ++n)
      obs_bound = std::max(obs_bound, std::abs(obs_coeffs[n]) / (1.0 + std::abs(eigenvalues[n])));
    if (initial_state.coeffs.empty())
      initial_state.coeffs.assign(eigenvalues.size(), std::complex<double>(0.0));
    if (initial_state.coeffs.size() != eigenvalues.size())
      throw std::domain_error("DiagonalSystem: initial state dimension mismatch");
  }

  std::size_t size() const { return eigenvalues.size(); }
};

namespace detail {

// Memoised scalar-resolvent values keyed by kernel, mu, t. Operator sweeps
// hit the same (mu, t) pairs repeatedly; fills are idempotent.
inline std::complex<double> cached_s_value(const KernelSpec& k, std::complex<double> mu,
                                           double t, double rel_tol, bool extended) {
  static std::unordered_map<std::string, std::complex<double>> cache;
  static std::mutex mtx;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "|%.17g,%.17g|%.17g|%.3g|%d", mu.real(), mu.imag(), t, rel_tol,
                extended ? 1 : 0);
  const std::string key = k.key() + buf;
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const std::complex<double> v = s_via_laplace(k, mu, t, rel_tol, extended);
  std::lock_guard<std::mutex> lock(mtx);
  cache.emplace(key, v);
  return v;
}

}  // namespace detail

/// T(t) x in eigencoordinates.
inline StateVector semigroup_apply(const DiagonalSystem& sys, double t, const StateVector& x) {
  if (!(t >= 0)) throw std::domain_error("semigroup_apply: t must be non-negative");
  if (x.coeffs.size() != sys.size()) throw std::domain_error("semigroup_apply: dimension mismatch");
  StateVector y = x;
  for (std::size_t n = 0; n < sys.size(); ++n) y.coeffs[n] *= std::exp(sys.eigenvalues[n] * t);
  return y;
}

/// S(t) x in eigencoordinates: coordinate-wise multiplication by s(t, -lambda_n).
inline StateVector solution_family_apply(const DiagonalSystem& sys, const KernelSpec& k, double t,
                                         const StateVector& x, double rel_tol = 1e-8) {
  if (!(t >= 0)) throw std::domain_error("solution_family_apply: t must be non-negative");
  if (x.coeffs.size() != sys.size())
    throw std::domain_error("solution_family_apply: dimension mismatch");
  StateVector y = x;
  if (t == 0) return y;
  for (std::size_t n = 0; n < sys.size(); ++n) {
    const std::complex<double> mu = -sys.eigenvalues[n];
    y.coeffs[n] *= detail::cached_s_value(k, mu, t, rel_tol, true);
  }
  return y;
}

/// Cross-check of the inversion engine against the time-stepping oracle on a
/// sample mode; returns the observed disagreement.
inline double solution_family_self_check(const DiagonalSystem& sys, const KernelSpec& k,
                                         double t, std::size_t mode = 0) {
  const std::complex<double> mu = -sys.eigenvalues.at(mode);
  const auto oracle = solve_scalar_oracle(k, mu, {t}, 1e-8).values[0];
  const auto inv = s_via_laplace(k, mu, t, 1e-9);
  return std::abs(oracle - inv) / std::max(1e-12, std::abs(oracle));
}

/// Coefficients of the observed transfer functional C H(lambda) in the
/// eigenbasis: c_n / (lambda (1 - a_hat(lambda) lambda_n)).
inline std::vector<std::complex<double>> transfer_H_coeffs(const DiagonalSystem& sys,
                                                           const KernelSpec& k,
                                                           std::complex<double> lambda) {
  using C = std::complex<double>;
  if (!(lambda.real() > 0))
    throw std::domain_error("transfer_H_coeffs: Re lambda must be positive");
  const C hat = k.laplace(lambda);
  std::vector<C> out(sys.size());
  for (std::size_t n = 0; n < sys.size(); ++n) {
    const C den = 1.0 - hat * sys.eigenvalues[n];
    if (std::abs(den) < 1e-12 * (1.0 + std::abs(hat * sys.eigenvalues[n])))
      throw std::domain_error("transfer_H_coeffs: resolvent singularity at the sampled point");
    out[n] = sys.obs_coeffs[n] / (lambda * den);
  }
  return out;
}

/// l2 norm of the transfer coefficients (scalar output space).
inline double transfer_H_norm(const DiagonalSystem& sys, const KernelSpec& k,
                              std::complex<double> lambda) {
  double s = 0;
  for (const auto& c : transfer_H_coeffs(sys, k, lambda)) s += std::norm(c);
  return std::sqrt(s);
}

/// l2 norm of (c_n / (lambda - lambda_n)): the classical resolvent bound
/// entering the sqrt(Re lambda) condition.
inline double resolvent_CR_norm(const DiagonalSystem& sys, std::complex<double> lambda) {
  if (!(lambda.real() > 0))
    throw std::domain_error("resolvent_CR_norm: Re lambda must be positive");
  double s = 0;
  for (std::size_t n = 0; n < sys.size(); ++n)
    s += std::norm(sys.obs_coeffs[n] / (lambda - sys.eigenvalues[n]));
  return std::sqrt(s);
}

namespace detail {

// Doubly log-graded mesh on [0, t]: resolves the boundary layer of stiff
// modes near r = 0 and the kernel singularity near r = t.
inline std::vector<double> residual_mesh(double t, int n_half) {
  std::vector<double> r;
  r.push_back(0.0);
  const double lo = 1e-12 * t;
  const double mid = 0.5 * t;
  for (int i = 0; i < n_half; ++i)
    r.push_back(lo * std::pow(mid / lo, double(i) / (n_half - 1)));
  for (int i = n_half - 2; i >= 0; --i)
    r.push_back(t - lo * std::pow(mid / lo, double(i) / (n_half - 1)));
  r.push_back(t);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

}  // namespace detail

/// Relative defect of the resolvent equation at time t:
///   || S(t)x - x - int_0^t a(t-s) A S(s) x ds || / ||x||.
///
/// The solution samples come from the inversion engine and the convolution
/// from product integration with exact kernel moments, so a small value
/// certifies cross-engine consistency.
inline double resolvent_residual(const DiagonalSystem& sys, const KernelSpec& k, double t,
                                 const StateVector& x, int n_half = 160) {
  using C = std::complex<double>;
  if (!(t > 0)) throw std::domain_error("resolvent_residual: t must be positive");
  if (x.coeffs.size() != sys.size())
    throw std::domain_error("resolvent_residual: dimension mismatch");
  if (!k.time_antideriv || !k.time_antideriv2)
    throw std::domain_error("resolvent_residual: kernel lacks moment data");
  const double xn = x.norm();
  if (xn == 0) return 0.0;

  const auto r = detail::residual_mesh(t, n_half);
  const std::size_t m = r.size();

  // Per-cell moments of a(t - r): I0 = mass, I1 = first moment about r_i.
  std::vector<double> I0(m - 1), I1(m - 1);
  std::vector<double> M(m), M2(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = std::max(0.0, t - r[i]);
    M[i] = k.time_antideriv(u);
    M2[i] = k.time_antideriv2(u);
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double ui = t - r[i], uj = t - r[i + 1];
    I0[i] = M[i] - M[i + 1];
    const double first = (ui * M[i] - M2[i]) - (uj * M[i + 1] - M2[i + 1]);
    I1[i] = (t - r[i]) * I0[i] - first;  // int a(t-r)(r - r_i) dr
  }

  double num = 0;
  for (std::size_t n = 0; n < sys.size(); ++n) {
    if (x.coeffs[n] == C(0.0)) continue;
    const C mu = -sys.eigenvalues[n];
    std::vector<C> s(m);
    s[0] = 1.0;
    for (std::size_t i = 1; i < m; ++i)
      s[i] = detail::cached_s_value(k, mu, r[i], 1e-9, false);
    C conv{};
    for (std::size_t i = 0; i + 1 < m; ++i)
      conv += s[i] * I0[i] + (s[i + 1] - s[i]) / (r[i + 1] - r[i]) * I1[i];
    const C defect = s[m - 1] - 1.0 + mu * conv;
    num += std::norm(x.coeffs[n] * defect);
  }
  return std::sqrt(num) / xn;
}

}  // namespace volterra
