#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

namespace volterra::quad {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
// Nodes are symmetric; only the non-negative half is stored.
template <class Real>
struct GK15 {
  static constexpr std::array<Real, 8> nodes = {
      Real(0.991455371120812639206854697526329L),
      Real(0.949107912342758524526189684047851L),
      Real(0.864864423359769072789712788640926L),
      Real(0.741531185599394439863864773280788L),
      Real(0.586087235467691130294144838258730L),
      Real(0.405845151377397166906606412076961L),
      Real(0.207784955007898467600689403773245L),
      Real(0.000000000000000000000000000000000L)};
  static constexpr std::array<Real, 8> kronrod_w = {
      Real(0.022935322010529224963732008058970L),
      Real(0.063092092629978553290700663189204L),
      Real(0.104790010322250183839876322541518L),
      Real(0.140653259715525918745189590510238L),
      Real(0.169004726639267902826583426598550L),
      Real(0.190350578064785409913256402421014L),
      Real(0.204432940075298892414161999234649L),
      Real(0.209482141084727828012999174891714L)};
  // Gauss weights for nodes 1, 3, 5 (and centre at index 7).
  static constexpr std::array<Real, 4> gauss_w = {
      Real(0.129484966168869693270611432679082L),
      Real(0.279705391489276667901467771423780L),
      Real(0.381830050505118944950369775488975L),
      Real(0.417959183673469387755102040816327L)};
};

template <class Real, class F>
auto gk15_panel(F&& f, Real a, Real b, Real& err_out) {
  using Value = decltype(f(a));
  const Real half = (b - a) / 2;
  const Real mid = (a + b) / 2;
  Value kron = Value{};
  Value gauss = Value{};
  Real resabs = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    const Real x = GK15<Real>::nodes[i];
    const Value fl = f(mid - half * x);
    const Value fr = f(mid + half * x);
    kron += GK15<Real>::kronrod_w[i] * (fl + fr);
    resabs += GK15<Real>::kronrod_w[i] * (std::abs(fl) + std::abs(fr));
    if (i % 2 == 1) gauss += GK15<Real>::gauss_w[i / 2] * (fl + fr);
  }
  const Value fc = f(mid);
  kron += GK15<Real>::kronrod_w[7] * fc;
  gauss += GK15<Real>::gauss_w[3] * fc;
  resabs += GK15<Real>::kronrod_w[7] * std::abs(fc);
  kron *= half;
  gauss *= half;
  err_out = std::abs(kron - gauss);
  // Floor the estimate at the roundoff level of the weighted sum.
  err_out = std::max(err_out,
                     resabs * std::abs(half) * std::numeric_limits<Real>::epsilon() * 4);
  return kron;
}

// Adaptive bisection around GK15. Stops once the summed error estimate drops
// below tol_abs + tol_rel*|integral|; the achieved estimate is reported
// through `err_out`.
template <class Real, class F>
auto adaptive_gk(F&& f, Real a, Real b, Real tol_abs, Real& err_out,
                 Real tol_rel = Real(0), int max_depth = 14) {
  using Value = decltype(f(a));
  struct Piece {
    Real a, b, err;
    Value val;
    int depth;
  };
  Real err0;
  Value v0 = gk15_panel<Real>(f, a, b, err0);
  std::vector<Piece> heap;
  heap.push_back({a, b, err0, v0, 0});
  auto worst = [](const Piece& p, const Piece& q) { return p.err < q.err; };
  Real total_err = err0;
  Value running = v0;
  while (total_err > tol_abs + tol_rel * std::abs(running)) {
    std::pop_heap(heap.begin(), heap.end(), worst);
    Piece p = heap.back();
    if (p.depth >= max_depth) break;
    heap.pop_back();
    const Real m = (p.a + p.b) / 2;
    Real e1, e2;
    Value v1 = gk15_panel<Real>(f, p.a, m, e1);
    Value v2 = gk15_panel<Real>(f, m, p.b, e2);
    total_err += e1 + e2 - p.err;
    running += v1 + v2 - p.val;
    heap.push_back({p.a, m, e1, v1, p.depth + 1});
    std::push_heap(heap.begin(), heap.end(), worst);
    heap.push_back({m, p.b, e2, v2, p.depth + 1});
    std::push_heap(heap.begin(), heap.end(), worst);
  }
  Value sum{};
  total_err = 0;
  for (const auto& p : heap) {
    sum += p.val;
    total_err += p.err;
  }
  err_out = total_err;
  return sum;
}

// Trapezoid sums under node doubling, accelerated by Romberg extrapolation of
// the doubling sequence. Optionally reports the L1 mass of the integrand
// (used as a decay monitor).
template <class Real, class F>
auto trapezoid_refined(F&& f, Real a, Real b, int n0, Real tol, Real& err_out,
                       int max_doublings = 10, Real* l1_mass = nullptr) {
  using Value = decltype(f(a));
  int n = std::max(n0, 4);
  Real h = (b - a) / n;
  Value sum = (f(a) + f(b)) / Real(2);
  Real mass = (std::abs(f(a)) + std::abs(f(b))) / 2;
  for (int i = 1; i < n; ++i) {
    const Value v = f(a + i * h);
    sum += v;
    mass += std::abs(v);
  }
  std::vector<Value> row = {sum * h};  // Romberg table, one row per level
  Value result = row[0];
  err_out = std::numeric_limits<Real>::infinity();
  Real prev_delta = err_out;
  for (int d = 0; d < max_doublings; ++d) {
    Value odd{};
    for (int i = 0; i < n; ++i) {
      const Value v = f(a + (i + Real(0.5)) * h);
      odd += v;
      mass += std::abs(v);
    }
    std::vector<Value> next(row.size() + 1);
    next[0] = (row[0] + h * odd) / Real(2);
    Real pow4 = 4;
    for (std::size_t j = 0; j < row.size(); ++j) {
      next[j + 1] = next[j] + (next[j] - row[j]) / (pow4 - 1);
      pow4 *= 4;
    }
    n *= 2;
    h /= 2;
    err_out = std::abs(next.back() - row.back());
    result = next.back();
    row = std::move(next);
    if (err_out < tol) break;
    // Stagnating deltas mean the integrand noise floor was hit; further
    // doublings only burn evaluations.
    if (d >= 2 && err_out > Real(0.6) * prev_delta) break;
    prev_delta = err_out;
  }
  if (l1_mass) *l1_mass = mass * h * 2;  // crude panel L1 estimate
  return result;
}

// Wynn's epsilon table, fed with partial sums; the even columns provide the
// accelerated limits. Used for the oscillatory tails of Bromwich integrals.
template <class Value>
class WynnEpsilon {
 public:
  void push(const Value& s) {
    diag_.push_back(s);
    Value prev{};  // epsilon_{-1} = 0
    for (std::size_t j = diag_.size() - 1; j-- > 0;) {
      const Value old = diag_[j];
      const Value delta = diag_[j + 1] - old;
      const auto d = std::abs(delta);
      if (d < tiny_) {
        diag_[j] = diag_[j + 1];
      } else {
        diag_[j] = prev + Value(1) / delta;
      }
      prev = old;
    }
    ++count_;
  }

  // Best available accelerated value (an even-order epsilon entry).
  Value estimate() const {
    if (diag_.empty()) return Value{};
    const std::size_t k = (diag_.size() % 2 == 1) ? 0 : 1;
    return diag_[k];
  }

  std::size_t size() const { return count_; }

 private:
  std::vector<Value> diag_;
  std::size_t count_ = 0;
  double tiny_ = 1e-60;
};

// Log-log least squares fit; returns (slope, r_squared).
template <class Real>
std::pair<Real, Real> loglog_fit(const std::vector<Real>& x, const std::vector<Real>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  Real sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real lx = std::log(x[i]);
    const Real ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const Real den = n * sxx - sx * sx;
  const Real slope = (n * sxy - sx * sy) / den;
  const Real ss_tot = syy - sy * sy / n;
  const Real ss_res = ss_tot - slope * (sxy - sx * sy / n);
  const Real r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1;
  return {slope, r2};
}

}  // namespace volterra::quad
