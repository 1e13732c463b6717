#include "sos/quadrature.hpp"

#include <cmath>
#include <vector>

namespace sos {
namespace {

constexpr double kHalfPi = 1.5707963267948966;

struct Node {
  double x;
  double w;
};

// Nodes for the map x = sinh(pi/2 * sinh t) over the whole line.
bool sinh_sinh_node(double t, Node* out) {
  const double s = kHalfPi * std::sinh(t);
  if (s > 300.0 || s < -300.0) return false;  // would overflow cosh/sinh
  out->x = std::sinh(s);
  out->w = kHalfPi * std::cosh(t) * std::cosh(s);
  return true;
}

// Nodes for the map x = mid + half*tanh(pi/2 * sinh t) over [a,b]. The
// abscissa is computed as a distance from the nearer endpoint in exponential
// form: naive mid + half*tanh(s) cancels catastrophically near the ends,
// which collapses late nodes onto the endpoints and breaks integrands with
// endpoint singularities.
bool tanh_sinh_node(double t, double a, double b, Node* out) {
  const double s = kHalfPi * std::sinh(t);
  if (s > 300.0 || s < -300.0) return false;
  const double half = 0.5 * (b - a);
  const double ch = std::cosh(s);
  // 1 -+ tanh(s) = 2 / (1 + exp(+-2s)), exact for large |s|.
  if (s >= 0.0) {
    out->x = b - 2.0 * half / (1.0 + std::exp(2.0 * s));
  } else {
    out->x = a + 2.0 * half / (1.0 + std::exp(-2.0 * s));
  }
  out->w = half * kHalfPi * std::cosh(t) / (ch * ch);
  return true;
}

template <class NodeFn>
QuadratureResult run_levels(const std::function<double(double)>& f,
                            const NodeFn& node_fn, double tmax, double tol,
                            int max_level) {
  QuadratureResult res;
  double raw = 0.0;     // sum of w*f over all nodes so far (step-free)
  double prev = 0.0;    // value at previous level
  bool all_finite = true;

  auto accumulate = [&](double t) {
    Node nd;
    if (!node_fn(t, &nd)) return;
    const double fx = f(nd.x);
    ++res.evaluations;
    if (!std::isfinite(fx)) {
      all_finite = false;
      return;
    }
    raw += nd.w * fx;
  };

  // Level 0: integer nodes. Level l adds the odd multiples of 2^-l.
  accumulate(0.0);
  for (double t = 1.0; t <= tmax; t += 1.0) {
    accumulate(t);
    accumulate(-t);
  }
  prev = raw;  // h = 1

  for (int level = 1; level <= max_level; ++level) {
    const double h = std::ldexp(1.0, -level);
    for (double t = h; t <= tmax; t += 2.0 * h) {
      accumulate(t);
      accumulate(-t);
    }
    const double cur = raw * h;
    res.error_estimate = std::abs(cur - prev);
    res.value = cur;
    if (level >= 3 &&
        res.error_estimate <= tol * std::max(1.0, std::abs(cur))) {
      res.converged = all_finite;
      return res;
    }
    prev = cur;
  }
  res.converged = false;
  return res;
}

}  // namespace

QuadratureResult integrate_real_line(const std::function<double(double)>& f,
                                     double tol, int max_level) {
  return run_levels(
      f, [](double t, Node* out) { return sinh_sinh_node(t, out); }, 4.75, tol,
      max_level);
}

QuadratureResult integrate_interval(const std::function<double(double)>& f,
                                    double a, double b, double tol,
                                    int max_level) {
  return run_levels(
      f, [&](double t, Node* out) { return tanh_sinh_node(t, a, b, out); },
      3.8, tol, max_level);
}

QuadratureResult integrate_plane(const std::function<double(double, double)>& f,
                                 double tol, int max_level) {
  QuadratureResult outer;
  std::size_t inner_evals = 0;
  bool inner_ok = true;
  auto sliced = [&](double x) {
    QuadratureResult inner = integrate_real_line(
        [&](double y) { return f(x, y); }, tol * 0.1, max_level);
    inner_evals += inner.evaluations;
    if (!inner.converged) inner_ok = false;
    return inner.value;
  };
  outer = integrate_real_line(sliced, tol, max_level);
  outer.evaluations = inner_evals;
  outer.converged = outer.converged && inner_ok;
  return outer;
}

}  // namespace sos
