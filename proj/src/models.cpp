#include "capcal/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "capcal/constants.hpp"
#include "capcal/errors.hpp"

namespace capcal::models {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double series_rel_tol = 1e-13;
constexpr std::size_t series_term_cap = 5'000'000;

void require_positive_separation(double d) {
  if (!(d > 0.0)) throw domain_error("separation d", d, "must be > 0");
}

// c * ln(c/s) with the c == 0 case taken as its limit, exactly 0. Keeps the
// degenerate lens (r1 == r2 == r) finite.
double coeff_log(double c, double s) { return c == 0.0 ? 0.0 : c * std::log(c / s); }

}  // namespace

double alpha_parameter(double d, const SphereGeometry& geom) {
  if (!(d >= 0.0)) throw domain_error("separation d", d, "must be >= 0");
  double x = d / geom.radius;
  // arccosh(1 + x) written to avoid cancellation at x << 1.
  return std::log1p(x + std::sqrt(x * (x + 2.0)));
}

num::SeriesResult exact_capacitance_series(double d, const SphereGeometry& geom) {
  require_positive_separation(d);
  const double alpha = alpha_parameter(d, geom);
  const double decay = -std::expm1(-alpha);  // 1 - e^-alpha
  num::CompensatedSum sum;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= series_term_cap; ++n) {
    double term = 1.0 / std::sinh(static_cast<double>(n) * alpha);
    sum.add(term);
    double tail = term / decay;
    if (term <= prev && tail < series_rel_tol * std::abs(sum.value())) {
      double prefactor = 4.0 * pi * vacuum_permittivity * geom.radius * std::sinh(alpha);
      return {prefactor * sum.value(), n, prefactor * tail};
    }
    prev = term;
  }
  throw convergence_error("exact capacitance series hit the term cap at d = " + std::to_string(d),
                          4.0 * pi * vacuum_permittivity * geom.radius * std::sinh(alpha) *
                              sum.value(),
                          series_term_cap);
}

double exact_capacitance(double d, const SphereGeometry& geom) {
  return exact_capacitance_series(d, geom).value;
}

num::SeriesResult exact_force_norm_series(double d, const SphereGeometry& geom) {
  require_positive_separation(d);
  const double alpha = alpha_parameter(d, geom);
  const double decay = -std::expm1(-alpha);
  const double coth_alpha = 1.0 / std::tanh(alpha);
  num::CompensatedSum sum;
  double prev = 0.0;
  for (std::size_t n = 1; n <= series_term_cap; ++n) {
    double na = static_cast<double>(n) * alpha;
    double term = (coth_alpha - static_cast<double>(n) / std::tanh(na)) / std::sinh(na);
    sum.add(term);
    // Terms grow ~n/3 up to n ~ 1/alpha before the exponential takes over;
    // only test the geometric tail bound once they are decaying.
    double mag = std::abs(term);
    double tail = mag / decay;
    if (n >= 2 && mag <= prev && tail < series_rel_tol * std::abs(sum.value())) {
      double prefactor = -2.0 * pi * vacuum_permittivity;
      return {prefactor * sum.value(), n, std::abs(prefactor) * tail};
    }
    prev = mag;
  }
  throw convergence_error("exact force series hit the term cap at d = " + std::to_string(d),
                          -2.0 * pi * vacuum_permittivity * sum.value(), series_term_cap);
}

double exact_force_norm(double d, const SphereGeometry& geom) {
  return exact_force_norm_series(d, geom).value;
}

double exact_force(double d, const SphereGeometry& geom, const VoltageConfig& volts) {
  double dv = volts.v - volts.v0;
  if (dv == 0.0) return 0.0;
  return -dv * dv * exact_force_norm(d, geom);
}

double electrostatic_energy(double d, const SphereGeometry& geom, const VoltageConfig& volts) {
  double dv = volts.v - volts.v0;
  if (dv == 0.0) return 0.0;
  return -0.5 * exact_capacitance(d, geom) * dv * dv;
}

double smallsep_capacitance(double d, const SphereGeometry& geom, ThetaParameter theta) {
  require_positive_separation(d);
  if (!(d < geom.radius)) throw domain_error("separation d", d, "must be < R");
  double r = geom.radius;
  return 2.0 * pi * vacuum_permittivity * r *
         (std::log(r / d) + std::log(2.0) + 23.0 / 20.0 + theta.value / 63.0);
}

double pfa_capacitance(double d, const SphereGeometry& geom) {
  require_positive_separation(d);
  if (!(d <= geom.radius)) throw domain_error("separation d", d, "must be <= R");
  return 2.0 * pi * vacuum_permittivity * geom.radius * std::log(geom.radius / d);
}

double pfa_force_norm(double d, const SphereGeometry& geom) {
  require_positive_separation(d);
  return pi * vacuum_permittivity * geom.radius / d;
}

double expansion_force_norm(double d, const SphereGeometry& geom,
                            const ExpansionCoefficients& coeffs) {
  require_positive_separation(d);
  double x = d / geom.radius;
  num::CompensatedSum sum;
  double xk = 1.0 / x;
  for (int k = -1; k <= 6; ++k) {
    sum.add(coeffs.at(k) * xk);
    xk *= x;
  }
  return 2.0 * pi * vacuum_permittivity * sum.value();
}

double expansion_capacitance(double d, const SphereGeometry& geom, ThetaParameter theta,
                             bool table_compat, const ExpansionCoefficients& coeffs) {
  require_positive_separation(d);
  double r = geom.radius;
  double x = d / r;
  double c_tilde = 0.5 * std::log(2.0) + 23.0 / 40.0 + theta.value / 126.0;
  num::CompensatedSum power_sum;
  double xk = x;
  for (int k = 0; k <= 6; ++k) {
    power_sum.add(coeffs.at(k) / (k + 1.0) * xk);
    xk *= x;
  }
  double sign = table_compat ? 1.0 : -1.0;
  return 4.0 * pi * vacuum_permittivity * r *
         (coeffs.at(-1) * std::log(r / d) + c_tilde + sign * power_sum.value());
}

double modified_force_norm(double d, const ModifiedLensGeometry& geom) {
  require_positive_separation(d);
  return pi * vacuum_permittivity *
         (geom.r2 / d + (geom.r1 - geom.r2) / (d + geom.h_small) -
          (geom.r1 - geom.r) / (d + geom.h_small + geom.h_large));
}

double modified_capacitance(double d, const ModifiedLensGeometry& geom, double c_tilde) {
  require_positive_separation(d);
  return 2.0 * pi * vacuum_permittivity *
             (coeff_log(geom.r2, d) + coeff_log(geom.r1 - geom.r2, d + geom.h_small) -
              coeff_log(geom.r1 - geom.r, d + geom.h_small + geom.h_large)) +
         c_tilde;
}

double modified_capacitance_small(double d, const ModifiedLensGeometry& geom) {
  require_positive_separation(d);
  constexpr double a1 = 32.804e-12;   // F
  constexpr double a3 = -360.48e-12;  // F
  return a1 + a3 * std::pow(d / geom.r, 0.3);
}

double modified_capacitance_large(double d, const ModifiedLensGeometry& geom, double c_tilde) {
  require_positive_separation(d);
  double log_term = 2.0 * pi * vacuum_permittivity * geom.r * std::log(geom.r / d);
  // H/d ((R1-R)/R - (R-R2)/R * h/H) written without the h/H ratio so the
  // flat limit stays finite.
  double correction = 2.0 * pi * vacuum_permittivity *
                      (geom.h_large * (geom.r1 - geom.r) - geom.h_small * (geom.r - geom.r2)) / d;
  return log_term + correction + c_tilde;
}

double parasitic_capacitance(double d, const ParasiticParams& params) {
  if (!std::isfinite(d)) throw domain_error("separation d", d, "must be finite");
  return params.a1 - params.a2 * d;
}

}  // namespace capcal::models
