#ifndef SQZ_NUMERIC_HPP_
#define SQZ_NUMERIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "sqz/errors.hpp"

// Small scalar solvers used throughout: a bracketing root finder, a bounded
// scalar minimizer, and an adaptive Gauss-Kronrod integrator.

namespace sqz::numeric {

// Brent's method on [lo, hi]. Requires f(lo) and f(hi) of opposite sign.
inline double find_root(const std::function<double(double)>& f, double lo,
                        double hi, double rel_tol = 1e-12,
                        int max_iter = 200) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw NumericalError("find_root: interval does not bracket a sign change");

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
    const double eps = std::numeric_limits<double>::epsilon();
    const double tol = 2.0 * eps * std::abs(b) + 0.5 * rel_tol * std::abs(b);
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;

    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      // interpolation step (secant or inverse quadratic)
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  throw NumericalError("find_root: no convergence");
}

// Brent minimizer on [lo, hi]; returns the abscissa of the minimum.
inline double minimize(const std::function<double(double)>& f, double lo,
                       double hi, double tol = 1e-10, int max_iter = 200) {
  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  double a = lo, b = hi;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double m = 0.5 * (a + b);
    const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
    const double t = eps * std::abs(x) + tol;
    if (std::abs(x - m) <= 2.0 * t - 0.5 * (b - a)) return x;

    bool parabolic = false;
    double u = 0.0;
    if (std::abs(e) > t) {
      // try a parabolic step through (v, w, x)
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      if (std::abs(p) < std::abs(0.5 * q * e) && p > q * (a - x) &&
          p < q * (b - x)) {
        e = d;
        d = p / q;
        u = x + d;
        if (u - a < 2.0 * t || b - u < 2.0 * t) d = (x < m) ? t : -t;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = golden * e;
    }
    u = x + ((std::abs(d) >= t) ? d : (d > 0.0 ? t : -t));
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  throw NumericalError("minimize: no convergence");
}

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
  double integral;
  double error;
};

template <typename F>
PanelResult gauss_kronrod_panel(const F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double f_mid = f(mid);
  double result_kronrod = kKronrodWeights[7] * f_mid;
  double result_gauss = kGaussWeights[3] * f_mid;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double fsum = f(mid - dx) + f(mid + dx);
    result_kronrod += kKronrodWeights[i] * fsum;
    if (i % 2 == 1) result_gauss += kGaussWeights[i / 2] * fsum;
  }
  return {result_kronrod * half,
          std::abs((result_kronrod - result_gauss) * half)};
}

}  // namespace detail

// Adaptive Gauss-Kronrod quadrature on [a, b]; bisects the panel with the
// largest error estimate until the summed error meets the relative tolerance.
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-10,
                 std::size_t max_panels = 2000) {
  struct Panel {
    double a, b, integral, error;
  };
  std::vector<Panel> panels;
  auto first = detail::gauss_kronrod_panel(f, a, b);
  panels.push_back({a, b, first.integral, first.error});

  while (panels.size() < max_panels) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].integral;
      err += panels[i].error;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    const double floor = 1e-300;
    if (err <= rel_tol * std::max(std::abs(total), floor)) return total;

    Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    auto left = detail::gauss_kronrod_panel(f, p.a, mid);
    auto right = detail::gauss_kronrod_panel(f, mid, p.b);
    panels[worst] = {p.a, mid, left.integral, left.error};
    panels.push_back({mid, p.b, right.integral, right.error});
  }
  throw NumericalError("integrate: panel budget exhausted before convergence");
}

}  // namespace sqz::numeric

#endif  // SQZ_NUMERIC_HPP_
