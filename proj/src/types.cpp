#include "capcal/types.hpp"

#include <cmath>

#include "capcal/errors.hpp"

namespace capcal {

namespace {

void require_finite(const char* name, double v) {
  if (!std::isfinite(v)) throw domain_error(name, v, "must be finite");
}

}  // namespace

SphereGeometry::SphereGeometry(double radius_m) : radius(radius_m) {
  require_finite("radius", radius_m);
  if (radius_m <= 0.0) throw domain_error("radius", radius_m, "must be > 0");
}

ModifiedLensGeometry::ModifiedLensGeometry(double r_m, double r1_m, double r2_m, double h_small_m,
                                           double h_large_m)
    : r(r_m), r1(r1_m), r2(r2_m), h_small(h_small_m), h_large(h_large_m) {
  require_finite("r", r_m);
  require_finite("r1", r1_m);
  require_finite("r2", r2_m);
  require_finite("h_small", h_small_m);
  require_finite("h_large", h_large_m);
  if (r_m <= 0.0) throw domain_error("r", r_m, "must be > 0");
  if (r1_m <= 0.0) throw domain_error("r1", r1_m, "must be > 0");
  if (r2_m <= 0.0) throw domain_error("r2", r2_m, "must be > 0");
  if (h_small_m < 0.0) throw domain_error("h_small", h_small_m, "must be >= 0");
  if (h_large_m < 0.0) throw domain_error("h_large", h_large_m, "must be >= 0");
  // Closures, not strict orderings, so the degenerate r1 == r2 == r sphere
  // is representable.
  if (r1_m < r_m) throw domain_error("r1", r1_m, "must be >= r");
  if (r2_m > r_m) throw domain_error("r2", r2_m, "must be <= r");
  if (h_small_m > h_large_m) throw domain_error("h_small", h_small_m, "must be <= h_large");
}

ThetaParameter::ThetaParameter(double theta) : value(theta) {
  require_finite("theta", theta);
  if (theta < 0.0 || theta > 1.0) throw domain_error("theta", theta, "must be in [0, 1]");
}

ParasiticParams::ParasiticParams(double a1_f, double a2_f_per_m) : a1(a1_f), a2(a2_f_per_m) {
  require_finite("parasitic a1", a1_f);
  require_finite("parasitic a2", a2_f_per_m);
}

const ExpansionCoefficients& ExpansionCoefficients::standard() {
  static const ExpansionCoefficients k{
      {0.5, -1.18260, 22.2375, -571.366, 9592.45, -90200.5, 383084.0, -300357.0}};
  return k;
}

}  // namespace capcal
