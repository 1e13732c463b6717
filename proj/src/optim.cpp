#include "sos/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sos/errors.hpp"

namespace sos {

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& init_step,
    const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw InvalidArgument("nelder_mead: empty start point");
  if (init_step.size() != n)
    throw InvalidArgument("nelder_mead: init_step size mismatch");

  NelderMeadResult res;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };

  std::vector<Eigen::VectorXd> vx(static_cast<std::size_t>(n) + 1, x0);
  std::vector<double> vf(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j < n; ++j) vx[static_cast<std::size_t>(j) + 1](j) += init_step(j);
  for (std::size_t i = 0; i < vx.size(); ++i) vf[i] = eval(vx[i]);

  std::vector<std::size_t> order(vx.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vf[a] < vf[b]; });
  };

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  while (true) {
    sort_simplex();
    const std::size_t best = order.front(), worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    const double fspread = vf[worst] - vf[best];
    double xspread = 0.0;
    for (std::size_t i = 1; i < order.size(); ++i)
      xspread = std::max(
          xspread, (vx[order[i]] - vx[best]).cwiseAbs().maxCoeff());
    const bool budget_done = evals >= opts.max_evals;
    const bool target_done = vf[best] <= opts.target_f;
    const bool tol_done = fspread <= opts.ftol && xspread <= opts.xtol;
    if (budget_done || target_done || tol_done) {
      res.x = vx[best];
      res.f = vf[best];
      res.evaluations = evals;
      res.converged = tol_done || target_done;
      return res;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += vx[order[i]];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + kReflect * (centroid - vx[worst]);
    const double fr = eval(xr);
    if (fr < vf[best]) {
      const Eigen::VectorXd xe = centroid + kExpand * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        vx[worst] = xe;
        vf[worst] = fe;
      } else {
        vx[worst] = xr;
        vf[worst] = fr;
      }
      continue;
    }
    if (fr < vf[second_worst]) {
      vx[worst] = xr;
      vf[worst] = fr;
      continue;
    }
    // Contract toward the better of (worst, reflected).
    const bool outside = fr < vf[worst];
    Eigen::VectorXd xc;
    if (outside) xc = centroid + kContract * (xr - centroid);
    else xc = centroid - kContract * (centroid - vx[worst]);
    const double fc = eval(xc);
    if (fc < std::min(fr, vf[worst])) {
      vx[worst] = xc;
      vf[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 1; i < order.size(); ++i) {
      const std::size_t idx = order[i];
      vx[idx] = vx[best] + kShrink * (vx[idx] - vx[best]);
      vf[idx] = eval(vx[idx]);
    }
  }
}

double brent_root(const std::function<double(double)>& f, double a, double b,
                  double xtol, int max_iter) {
  double fa = f(a), fb = f(b);
  if (!(std::isfinite(fa) && std::isfinite(fb)))
    throw InvalidArgument("brent_root: non-finite function at bracket ends");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw InvalidArgument("brent_root: root not bracketed");

  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() *
                            std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p, q;
      if (a == c) {  // secant
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {  // inverse quadratic
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q),
                             std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

}  // namespace sos
