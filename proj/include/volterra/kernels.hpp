#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "volterra/specfun.hpp"

namespace volterra {

/// A scalar convolution kernel given through its Laplace transform in closed
/// form. Time-domain data (the kernel itself and its first two repeated
/// antiderivatives) is optional and only present for kernels that admit it;
/// the product-integration solver requires it.
struct KernelSpec {
  using C = std::complex<double>;
  using CL = std::complex<long double>;

  std::string name;
  std::map<std::string, double> params;

  std::function<C(C)> laplace;      // a_hat
  std::function<C(C)> laplace_d1;   // a_hat'
  std::function<C(C)> laplace_d2;   // a_hat'' (may be empty)
  std::function<CL(CL)> laplace_ld; // extended-precision a_hat (may be empty)

  std::function<double(double)> time_domain;      // a(t) (may be empty)
  std::function<double(double)> time_antideriv;   // int_0^x a (may be empty)
  std::function<double(double)> time_antideriv2;  // int_0^x int_0^u a (may be empty)
  std::function<long double(long double)> time_antideriv_ld;   // optional
  std::function<long double(long double)> time_antideriv2_ld;  // optional

  double singularity_exponent = 0.0;  // rho with a(t) ~ t^-rho near 0, rho < 1

  bool has_time_domain() const { return static_cast<bool>(time_domain); }

  CL hat_ld(CL s) const {
    if (laplace_ld) return laplace_ld(s);
    const C v = laplace(C(static_cast<double>(s.real()), static_cast<double>(s.imag())));
    return CL(v.real(), v.imag());
  }

  long double antideriv_ld(long double x) const {
    return time_antideriv_ld ? time_antideriv_ld(x)
                             : static_cast<long double>(time_antideriv(static_cast<double>(x)));
  }
  long double antideriv2_ld(long double x) const {
    return time_antideriv2_ld ? time_antideriv2_ld(x)
                              : static_cast<long double>(time_antideriv2(static_cast<double>(x)));
  }

  // Stable identity string, used as a cache key.
  std::string key() const {
    std::string k = name;
    char buf[64];
    for (const auto& [n, v] : params) {
      std::snprintf(buf, sizeof(buf), "|%s=%.17g", n.c_str(), v);
      k += buf;
    }
    return k;
  }
};

/// Log-spaced moduli times an argument fan: a finite stand-in for suprema
/// over the right half-plane (or a wider sector).
struct SectorGrid {
  std::vector<double> moduli;
  std::vector<double> arguments;
  double margin = 1e-3;

  static SectorGrid make(double mod_lo, double mod_hi, int n_mod, double half_angle,
                         int n_arg, double margin) {
    if (!(mod_lo > 0) || !(mod_hi > mod_lo) || n_mod < 2 || n_arg < 1 || !(margin > 0))
      throw std::domain_error("SectorGrid: invalid parameters");
    SectorGrid g;
    g.margin = margin;
    g.moduli.resize(n_mod);
    const double lr = std::log(mod_hi / mod_lo);
    for (int i = 0; i < n_mod; ++i)
      g.moduli[i] = mod_lo * std::exp(lr * i / (n_mod - 1));
    g.arguments.resize(n_arg);
    const double a = half_angle - margin;
    for (int j = 0; j < n_arg; ++j)
      g.arguments[j] = n_arg == 1 ? 0.0 : -a + 2 * a * j / (n_arg - 1);
    return g;
  }

  /// Default sampling of the open right half-plane.
  static SectorGrid half_plane(double scale = 1.0) {
    const int m = std::max(16, static_cast<int>(200 * scale));
    int p = std::max(9, static_cast<int>(181 * scale));
    if (p % 2 == 0) ++p;  // keep the real axis in the fan
    return make(1e-6, 1e6, m, std::numbers::pi / 2, p, 1e-3);
  }

  /// Midpoint insertion in both directions; the refined grid is a superset,
  /// so grid suprema are monotone under refinement.
  SectorGrid refined() const {
    SectorGrid g;
    g.margin = margin;
    g.moduli.reserve(2 * moduli.size() - 1);
    for (std::size_t i = 0; i < moduli.size(); ++i) {
      g.moduli.push_back(moduli[i]);
      if (i + 1 < moduli.size())
        g.moduli.push_back(std::sqrt(moduli[i] * moduli[i + 1]));
    }
    g.arguments.reserve(2 * arguments.size() - 1);
    for (std::size_t j = 0; j < arguments.size(); ++j) {
      g.arguments.push_back(arguments[j]);
      if (j + 1 < arguments.size())
        g.arguments.push_back((arguments[j] + arguments[j + 1]) / 2);
    }
    std::sort(g.moduli.begin(), g.moduli.end());
    std::sort(g.arguments.begin(), g.arguments.end());
    return g;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (double m : moduli)
      for (double phi : arguments) fn(std::polar(m, phi));
  }
};

/// Grid-based evidence for the kernel hypotheses. These are sampled
/// certificates, not proofs; `note` says so.
struct KernelCertificate {
  int regularity_order = 1;
  double regularity_constant = 0;
  double sector_angle = 0;              // grid supremum of |arg a_hat|
  double sector_angle_extrapolated = 0; // fan-edge extrapolation of the same
  bool angle_on_boundary = false;
  double growth_constant = 0;
  SectorGrid grid;
  std::map<std::string, bool> pass_flags;
  std::string note = "grid-sampled evidence, not a proof";
};

// ---------------------------------------------------------------------------
// Built-in kernels

namespace detail {

template <class R>
std::complex<R> hat_constant_one(std::complex<R> s) {
  return R(1) / s;
}

template <class R>
auto make_hat_fractional(double beta) {
  return [beta](std::complex<R> s) { return std::pow(s, -R(beta)); };
}

template <class R>
auto make_hat_distributed(double alpha, double g, double omega) {
  return [=](std::complex<R> s) {
    return std::pow(s, -R(alpha)) / (R(omega) + std::pow(s, R(g)));
  };
}

}  // namespace detail

/// Kernel registry. Names: constant_one, fractional_power (beta),
/// distributed_order (alpha, beta, omega).
inline KernelSpec builtin_kernel(const std::string& name,
                                 const std::map<std::string, double>& params = {}) {
  using C = std::complex<double>;
  using CL = std::complex<long double>;
  KernelSpec k;
  k.name = name;
  k.params = params;

  auto param = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end())
      throw std::domain_error("builtin_kernel: missing parameter '" + std::string(key) +
                              "' for " + name);
    return it->second;
  };

  if (name == "constant_one") {
    k.laplace = [](C s) { return 1.0 / s; };
    k.laplace_d1 = [](C s) { return -1.0 / (s * s); };
    k.laplace_d2 = [](C s) { return 2.0 / (s * s * s); };
    k.laplace_ld = [](CL s) { return detail::hat_constant_one<long double>(s); };
    k.time_domain = [](double) { return 1.0; };
    k.time_antideriv = [](double x) { return x; };
    k.time_antideriv2 = [](double x) { return x * x / 2; };
    k.time_antideriv_ld = [](long double x) { return x; };
    k.time_antideriv2_ld = [](long double x) { return x * x / 2; };
    k.singularity_exponent = 0.0;
    return k;
  }

  if (name == "fractional_power") {
    const double beta = param("beta");
    if (!(beta > 0.0 && beta <= 1.0))
      throw std::domain_error("fractional_power: need beta in (0, 1]");
    const double g0 = std::exp(std::lgamma(beta));
    const double g1 = std::exp(std::lgamma(beta + 1));
    const double g2 = std::exp(std::lgamma(beta + 2));
    k.laplace = detail::make_hat_fractional<double>(beta);
    k.laplace_d1 = [beta](C s) { return -beta * std::pow(s, -beta - 1.0); };
    k.laplace_d2 = [beta](C s) { return beta * (beta + 1.0) * std::pow(s, -beta - 2.0); };
    k.laplace_ld = detail::make_hat_fractional<long double>(beta);
    k.time_domain = [beta, g0](double t) { return std::pow(t, beta - 1.0) / g0; };
    k.time_antideriv = [beta, g1](double x) { return std::pow(x, beta) / g1; };
    k.time_antideriv2 = [beta, g2](double x) { return std::pow(x, beta + 1.0) / g2; };
    const long double g1l = std::exp(std::lgamma(static_cast<long double>(beta) + 1));
    const long double g2l = std::exp(std::lgamma(static_cast<long double>(beta) + 2));
    k.time_antideriv_ld = [beta, g1l](long double x) {
      return std::pow(x, static_cast<long double>(beta)) / g1l;
    };
    k.time_antideriv2_ld = [beta, g2l](long double x) {
      return std::pow(x, static_cast<long double>(beta) + 1) / g2l;
    };
    k.singularity_exponent = 1.0 - beta;
    return k;
  }

  if (name == "distributed_order") {
    const double alpha = param("alpha");
    const double beta = param("beta");
    const double omega = param("omega");
    if (!(alpha > 0.0 && 2 * alpha < beta && beta <= 1.0))
      throw std::domain_error("distributed_order: need 0 < 2*alpha < beta <= 1");
    if (!(omega > 0.0)) throw std::domain_error("distributed_order: need omega > 0");
    const double g = beta - alpha;  // Mittag-Leffler order of the kernel
    // Termwise inversion of lambda^{-alpha}/(omega + lambda^{beta-alpha})
    // fixes the second Mittag-Leffler parameter at beta.
    const double d = beta;
    k.laplace = detail::make_hat_distributed<double>(alpha, g, omega);
    k.laplace_d1 = [=](C s) {
      const C u = omega + std::pow(s, g);
      const C up = g * std::pow(s, g - 1.0);
      return -alpha * std::pow(s, -alpha - 1.0) / u - std::pow(s, -alpha) * up / (u * u);
    };
    k.laplace_d2 = [=](C s) {
      const C u = omega + std::pow(s, g);
      const C up = g * std::pow(s, g - 1.0);
      const C upp = g * (g - 1.0) * std::pow(s, g - 2.0);
      return alpha * (alpha + 1.0) * std::pow(s, -alpha - 2.0) / u +
             2.0 * alpha * std::pow(s, -alpha - 1.0) * up / (u * u) +
             2.0 * std::pow(s, -alpha) * up * up / (u * u * u) -
             std::pow(s, -alpha) * upp / (u * u);
    };
    k.laplace_ld = detail::make_hat_distributed<long double>(alpha, g, omega);
    k.time_domain = [=](double t) {
      return std::pow(t, d - 1.0) *
             mittag_leffler(MLParams{g, d}, -omega * std::pow(t, g)).real();
    };
    k.time_antideriv = [=](double x) {
      return std::pow(x, d) *
             mittag_leffler(MLParams{g, d + 1.0}, -omega * std::pow(x, g)).real();
    };
    k.time_antideriv2 = [=](double x) {
      return std::pow(x, d + 1.0) *
             mittag_leffler(MLParams{g, d + 2.0}, -omega * std::pow(x, g)).real();
    };
    k.singularity_exponent = 1.0 - d;  // = 1 - beta
    return k;
  }

  throw std::domain_error("builtin_kernel: unknown kernel '" + name + "'");
}

// ---------------------------------------------------------------------------
// Certification sweeps

/// max over n in {1..order} and grid points of |s^n a_hat^(n)(s)| / |a_hat(s)|.
inline double regularity_constant(const KernelSpec& k, int order, const SectorGrid& g,
                                  std::vector<double>* per_order = nullptr) {
  if (order < 1 || order > 2)
    throw std::domain_error("regularity_constant: order must be 1 or 2");
  if (!k.laplace_d1 || (order == 2 && !k.laplace_d2))
    throw std::domain_error("regularity_constant: derivative of requested order missing");
  std::vector<double> maxima(order, 0.0);
  g.for_each([&](std::complex<double> s) {
    const auto hat = k.laplace(s);
    const double base = std::abs(hat);
    maxima[0] = std::max(maxima[0], std::abs(s * k.laplace_d1(s)) / base);
    if (order == 2)
      maxima[1] = std::max(maxima[1], std::abs(s * s * k.laplace_d2(s)) / base);
  });
  if (per_order) *per_order = maxima;
  return *std::max_element(maxima.begin(), maxima.end());
}

/// Grid supremum of |arg a_hat| over the right half-plane sampling.
/// `on_boundary` reports whether the supremum sits on the argument fan edge,
/// i.e. the true supremum is approached rather than attained.
inline double sectorial_angle(const KernelSpec& k, const SectorGrid& g,
                              bool* on_boundary = nullptr) {
  double sup = 0.0;
  double arg_at_sup = 0.0;
  g.for_each([&](std::complex<double> s) {
    const double a = std::abs(std::arg(k.laplace(s)));
    if (a > sup) {
      sup = a;
      arg_at_sup = std::arg(s);
    }
  });
  if (on_boundary) {
    const double edge = std::max(std::abs(g.arguments.front()), std::abs(g.arguments.back()));
    *on_boundary = std::abs(std::abs(arg_at_sup) - edge) < 1e-12;
  }
  return sup;
}

/// Two-branch lower bound |a_hat| >= c |s|^{-rho0} (|s|>=1), c |s|^{rho0}
/// (|s|<=1) with rho0 = 2*theta/pi. Returns the grid infimum of the two
/// normalised branches and a stability flag under one refinement.
inline std::pair<double, bool> growth_lower_bound(const KernelSpec& k, double theta,
                                                  const SectorGrid& g) {
  if (!(theta > 0 && theta <= std::numbers::pi))
    throw std::domain_error("growth_lower_bound: theta out of range");
  const double rho0 = 2 * theta / std::numbers::pi;
  auto inf_on = [&](const SectorGrid& grid) {
    double c = std::numeric_limits<double>::infinity();
    grid.for_each([&](std::complex<double> s) {
      const double m = std::abs(s);
      const double v = std::abs(k.laplace(s)) * std::pow(m, m >= 1.0 ? rho0 : -rho0);
      c = std::min(c, v);
    });
    return c;
  };
  const double c0 = inf_on(g);
  const double c1 = inf_on(g.refined());
  const bool pass = c1 > 0 && std::abs(c1 - c0) <= 0.05 * c0;
  return {std::min(c0, c1), pass};
}

/// Empirical supremum of (1+|s|)/|1+s| over the sector of half-angle pi-theta.
inline double sector_inequality_constant(double theta, const SectorGrid& g) {
  if (!(theta > 0 && theta < std::numbers::pi))
    throw std::domain_error("sector_inequality_constant: theta out of range");
  double sup = 0.0;
  g.for_each([&](std::complex<double> s) {
    sup = std::max(sup, (1.0 + std::abs(s)) / std::abs(1.0 + s));
  });
  return sup;
}

/// Grid over the sector of half-angle pi-theta, for the inequality above.
inline SectorGrid sector_grid_for_inequality(double theta, double scale = 1.0) {
  const int m = std::max(16, static_cast<int>(200 * scale));
  int p = std::max(9, static_cast<int>(181 * scale));
  if (p % 2 == 0) ++p;
  return SectorGrid::make(1e-6, 1e6, m, std::numbers::pi - theta, p, 1e-3);
}

/// Sufficient parabolicity test: kernel angle plus operator angle below pi,
/// and 1/a_hat(s) stays away from every supplied eigenvalue on the grid.
inline bool parabolicity_check(const KernelSpec& k,
                               const std::vector<std::complex<double>>& eigenvalues,
                               double omega, const SectorGrid& g) {
  const double theta = sectorial_angle(k, g);
  if (!(theta + omega < std::numbers::pi)) return false;
  bool ok = true;
  g.for_each([&](std::complex<double> s) {
    if (!ok) return;
    const std::complex<double> inv = 1.0 / k.laplace(s);
    for (const auto& ev : eigenvalues) {
      if (std::abs(inv - ev) <= 1e-12 * std::max(1.0, std::abs(ev))) {
        ok = false;
        return;
      }
    }
  });
  return ok;
}

/// Full sweep: 1-regularity, sector angle, growth bound, conjugate symmetry.
inline KernelCertificate certify_kernel(const KernelSpec& k, const SectorGrid& g,
                                        int order = 1) {
  KernelCertificate cert;
  cert.grid = g;
  cert.regularity_order = order;
  const SectorGrid fine = g.refined();

  const double reg0 = regularity_constant(k, order, g);
  const double reg1 = regularity_constant(k, order, fine);
  cert.regularity_constant = reg1;
  cert.pass_flags["regular"] = std::abs(reg1 - reg0) <= 0.01 * std::max(reg0, 1e-30);

  cert.sector_angle = sectorial_angle(k, fine, &cert.angle_on_boundary);
  // A supremum sitting on the fan edge is approached, not attained; scale it
  // out to the full quarter turn before comparing against pi/2.
  const double edge = std::numbers::pi / 2 - fine.margin;
  cert.sector_angle_extrapolated =
      cert.angle_on_boundary ? cert.sector_angle * (std::numbers::pi / 2) / edge
                             : cert.sector_angle;
  cert.pass_flags["sectorial_below_half_pi"] =
      cert.sector_angle_extrapolated < std::numbers::pi / 2 - 1e-9;

  const auto [c_est, stable] = growth_lower_bound(k, cert.sector_angle, g);
  cert.growth_constant = c_est;
  cert.pass_flags["growth_bound"] = c_est > 0 && stable;

  bool conj_ok = true;
  g.for_each([&](std::complex<double> s) {
    const auto a = k.laplace(std::conj(s));
    const auto b = std::conj(k.laplace(s));
    if (std::abs(a - b) > 1e-13 * std::max(1.0, std::abs(b))) conj_ok = false;
  });
  cert.pass_flags["real_kernel_symmetry"] = conj_ok;

  bool nonzero = true;
  g.for_each([&](std::complex<double> s) {
    if (!(std::abs(k.laplace(s)) > 0)) nonzero = false;
  });
  cert.pass_flags["transform_nonzero"] = nonzero;
  return cert;
}

}  // namespace volterra
