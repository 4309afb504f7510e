#include "capcal/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "capcal/errors.hpp"

namespace capcal::num {

double compensated_total(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

// ---------------------------------------------------------------------------
// Brent scalar minimization

ScalarMinimum minimize_scalar(const std::function<double(double)>& objective, double lo, double hi,
                              double tol, std::size_t max_iterations) {
  if (!(lo < hi)) throw domain_error("bracket width", hi - lo, "requires lo < hi");
  if (!(tol > 0.0)) throw domain_error("tol", tol, "must be > 0");

  constexpr double golden = 0.3819660112501051;  // 2 - phi
  const double eps_step = std::sqrt(std::numeric_limits<double>::epsilon());

  ScalarMinimum result;
  auto eval = [&](double xx) {
    double fx = objective(xx);
    ++result.evaluations;
    if (!std::isfinite(fx)) throw domain_error("objective at x", xx, "must be finite");
    return fx;
  };

  double a = lo, b = hi;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = eval(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    double m = 0.5 * (a + b);
    double tol1 = eps_step * std::abs(x) + tol / 3.0;
    double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) {
      result.x = x;
      result.f = fx;
      return result;
    }
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      // Trial parabola through x, v, w.
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = golden * e;
    }
    double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
    double fu = eval(u);
    if (fu <= fx) {
      if (u < x)
        b = x;
      else
        a = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  result.x = x;
  result.f = fx;
  result.converged = false;
  return result;
}

// ---------------------------------------------------------------------------
// Regularized incomplete gamma

namespace {

// Lower series: P(a, x) = x^a e^-x / Gamma(a+1) * sum x^n / ((a+1)...(a+n)).
double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-17)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw convergence_error("regularized gamma series did not converge", sum, 10000);
}

// Upper continued fraction (modified Lentz).
double gamma_q_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16)
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  throw convergence_error("regularized gamma continued fraction did not converge", h, 10000);
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw domain_error("gamma shape a", a, "must be > 0");
  if (!(x >= 0.0)) throw domain_error("gamma argument x", x, "must be >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_p_value(double chi2, std::size_t dof) {
  if (!(chi2 >= 0.0)) throw domain_error("chi2", chi2, "must be >= 0");
  if (dof < 1) throw domain_error("dof", static_cast<double>(dof), "must be >= 1");
  return regularized_gamma_q(0.5 * static_cast<double>(dof), 0.5 * chi2);
}

// ---------------------------------------------------------------------------
// Derivatives and slopes

double central_derivative(const std::function<double(double)>& f, double x, double scale,
                          double floor) {
  double h = std::max(scale * std::abs(x), floor);
  double hi = f(x + h);
  double lo = f(x - h);
  if (!std::isfinite(hi)) throw domain_error("f(x+h) at x+h", x + h, "must be finite");
  if (!std::isfinite(lo)) throw domain_error("f(x-h) at x-h", x - h, "must be finite");
  return (hi - lo) / (2.0 * h);
}

double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw domain_error("sample count", static_cast<double>(xs.size()),
                       "requires matching xs/ys with >= 2 points");
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0)) throw domain_error("x sample", xs[i], "must be > 0");
    if (!(ys[i] > 0.0)) throw domain_error("y sample", ys[i], "must be > 0");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = compensated_total(lx) / static_cast<double>(lx.size());
  double my = compensated_total(ly) / static_cast<double>(ly.size());
  CompensatedSum sxx, sxy;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx.add((lx[i] - mx) * (lx[i] - mx));
    sxy.add((lx[i] - mx) * (ly[i] - my));
  }
  if (sxx.value() == 0.0) throw domain_error("x spread", 0.0, "abscissae must not be all equal");
  return sxy.value() / sxx.value();
}

}  // namespace capcal::num
