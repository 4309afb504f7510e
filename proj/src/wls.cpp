#include <Eigen/Dense>
#include <Eigen/QR>
#include <cmath>

#include "capcal/errors.hpp"
#include "capcal/numerics.hpp"

namespace capcal::num {

WlsSolution weighted_linear_least_squares(const DesignMatrix& design, std::span<const double> y,
                                          std::span<const double> sigma) {
  const std::size_t n = design.rows;
  const std::size_t p = design.cols;
  if (p < 1 || n < p)
    throw domain_error("observation count", static_cast<double>(n), "requires n >= p >= 1");
  if (y.size() != n || sigma.size() != n)
    throw domain_error("vector length", static_cast<double>(y.size()),
                       "y and sigma must have one entry per design row");
  for (std::size_t i = 0; i < n; ++i)
    if (!(sigma[i] > 0.0)) throw domain_error("sigma", sigma[i], "must be > 0");

  // Weighted design A = diag(1/sigma) X, target b = y / sigma.
  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0 / sigma[i];
    b(static_cast<Eigen::Index>(i)) = y[i] * w;
    for (std::size_t j = 0; j < p; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = design.at(i, j) * w;
  }

  // Rescale columns to unit norm before factorizing; design columns like
  // {1, d} with d in meters are badly scaled otherwise.
  Eigen::VectorXd scale(p);
  for (std::size_t j = 0; j < p; ++j) {
    double norm = a.col(static_cast<Eigen::Index>(j)).norm();
    if (norm == 0.0)
      throw singular_error("design column " + std::to_string(j) + " is identically zero", j);
    scale(static_cast<Eigen::Index>(j)) = norm;
    a.col(static_cast<Eigen::Index>(j)) /= norm;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(p)) {
    // First pivot position past the numerical rank identifies the column
    // that is linearly dependent on the ones already accepted.
    std::size_t offending = static_cast<std::size_t>(qr.colsPermutation().indices()(qr.rank()));
    throw singular_error("rank-deficient design: column " + std::to_string(offending) +
                             " is linearly dependent",
                         offending);
  }

  Eigen::VectorXd beta_scaled = qr.solve(b);
  Eigen::VectorXd beta = beta_scaled.cwiseQuotient(scale);

  // Covariance = (A_unscaled^T A_unscaled)^-1 via R from the pivoted QR.
  Eigen::MatrixXd r = qr.matrixR()
                          .topLeftCorner(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p))
                          .triangularView<Eigen::Upper>();
  Eigen::MatrixXd rinv = r.inverse();
  Eigen::MatrixXd cov_scaled = rinv * rinv.transpose();
  Eigen::MatrixXd perm = qr.colsPermutation();
  Eigen::MatrixXd cov = perm * cov_scaled * perm.transpose();
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < p; ++k)
      cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) /=
          scale(static_cast<Eigen::Index>(j)) * scale(static_cast<Eigen::Index>(k));

  WlsSolution out;
  out.params.assign(p, 0.0);
  out.covariance.assign(p, std::vector<double>(p, 0.0));
  for (std::size_t j = 0; j < p; ++j) {
    out.params[j] = beta(static_cast<Eigen::Index>(j));
    for (std::size_t k = 0; k < p; ++k)
      out.covariance[j][k] = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  }

  // Residual chi^2 with compensated accumulation in row order.
  CompensatedSum chi2;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (std::size_t j = 0; j < p; ++j) fit += design.at(i, j) * out.params[j];
    double resid = (y[i] - fit) / sigma[i];
    chi2.add(resid * resid);
  }
  out.residual_chi2 = chi2.value();
  return out;
}

}  // namespace capcal::num
