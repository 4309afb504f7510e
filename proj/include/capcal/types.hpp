#ifndef CAPCAL_TYPES_HPP
#define CAPCAL_TYPES_HPP

#include <array>

namespace capcal {

// Perfect sphere of radius R above the plane.
struct SphereGeometry {
  explicit SphereGeometry(double radius_m);
  double radius;  // m
};

// Lens surface locally modified near the bottom point: two sectors with
// curvature radii r2 (innermost) and r1 (outermost) of heights h_small and
// h_large around the nominal radius r. Degenerate r1 == r2 == r reduces
// every modified form to the perfect sphere.
struct ModifiedLensGeometry {
  ModifiedLensGeometry(double r_m, double r1_m, double r2_m, double h_small_m, double h_large_m);
  double r;        // m, nominal radius
  double r1;       // m, outer-sector radius, >= r
  double r2;       // m, inner-sector radius, <= r
  double h_small;  // m
  double h_large;  // m
};

// Shape parameter of the small-separation capacitance band, 0 <= theta <= 1.
struct ThetaParameter {
  ThetaParameter() = default;
  explicit ThetaParameter(double theta);
  double value = 0.5;
};

// Applied voltage and residual potential difference.
struct VoltageConfig {
  double v = 0.0;   // V
  double v0 = 0.0;  // V
};

// Linear separation-dependent background, C^p(d) = a1 - a2 d.
struct ParasiticParams {
  ParasiticParams(double a1_f, double a2_f_per_m);
  double a1;  // F
  double a2;  // F/m, sign unconstrained
};

// Coefficients c_k, k = -1..6, of the force expansion in powers of d/R.
struct ExpansionCoefficients {
  static const ExpansionCoefficients& standard();
  double at(int k) const { return c.at(static_cast<std::size_t>(k + 1)); }
  std::array<double, 8> c{};
};

}  // namespace capcal

#endif
