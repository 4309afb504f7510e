#ifndef CAPCAL_NUMERICS_HPP
#define CAPCAL_NUMERICS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace capcal::num {

// Diagnostics of a truncated series evaluation.
struct SeriesResult {
  double value = 0.0;
  std::size_t terms_used = 0;
  double tail_bound = 0.0;
};

// Neumaier-compensated accumulator. Fixed accumulation order makes results
// bit-identical for identical inputs.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_total(std::span<const double> xs);

// Weighted linear least squares, design row-major.
struct DesignMatrix {
  DesignMatrix(std::size_t rows, std::size_t cols) : rows(rows), cols(cols), a(rows * cols, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
  std::size_t rows, cols;
  std::vector<double> a;
};

struct WlsSolution {
  std::vector<double> params;
  std::vector<std::vector<double>> covariance;  // symmetric p x p
  double residual_chi2 = 0.0;
};

// Minimizes sum_i (y_i - (X p)_i)^2 / sigma_i^2. Column-pivoted Householder
// QR on the rescaled weighted design; throws singular_error on rank
// deficiency, naming the dependent column.
WlsSolution weighted_linear_least_squares(const DesignMatrix& design,
                                          std::span<const double> y,
                                          std::span<const double> sigma);

struct ScalarMinimum {
  double x = 0.0;
  double f = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

// Brent minimizer (golden section with parabolic acceleration) on [lo, hi].
// Never evaluates outside the bracket; deterministic for identical inputs.
ScalarMinimum minimize_scalar(const std::function<double(double)>& objective,
                              double lo, double hi, double tol = 1e-10,
                              std::size_t max_iterations = 500);

// Upper regularized incomplete gamma Q(a, x) = Gamma(a, x)/Gamma(a).
// Series for x < a + 1, continued fraction otherwise; |error| <= 1e-12.
double regularized_gamma_q(double a, double x);

// P(X >= chi2) for X ~ chi^2 with dof degrees of freedom.
double chi2_p_value(double chi2, std::size_t dof);

// Central difference with step h = max(scale*|x|, floor).
double central_derivative(const std::function<double(double)>& f, double x,
                          double scale = 1e-6, double floor = 1e-12);

// Ordinary least-squares slope of (ln x, ln y).
double loglog_slope(std::span<const double> xs, std::span<const double> ys);

}  // namespace capcal::num

#endif
