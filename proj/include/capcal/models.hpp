#ifndef CAPCAL_MODELS_HPP
#define CAPCAL_MODELS_HPP

#include "capcal/numerics.hpp"
#include "capcal/types.hpp"

// Closed-form electrostatics of a conducting sphere (or locally modified
// lens) above a conducting plane. All separations d and returned values are
// SI. Normalized forces are -F/(V-V0)^2, positive for attraction.

namespace capcal::models {

// Bispherical parameter, cosh(alpha) = 1 + d/R, cancellation-safe at d << R.
double alpha_parameter(double d, const SphereGeometry& geom);

// Exact series C(d) = 4 pi eps0 R sinh(alpha) sum_n 1/sinh(n alpha).
num::SeriesResult exact_capacitance_series(double d, const SphereGeometry& geom);
double exact_capacitance(double d, const SphereGeometry& geom);

// Exact series -F/(V-V0)^2 = -2 pi eps0 sum_n [coth(alpha) - n coth(n alpha)]/sinh(n alpha).
num::SeriesResult exact_force_norm_series(double d, const SphereGeometry& geom);
double exact_force_norm(double d, const SphereGeometry& geom);

// Signed force, N; negative = attractive.
double exact_force(double d, const SphereGeometry& geom, const VoltageConfig& volts);

// E(d) = -C(d) (V-V0)^2 / 2, J.
double electrostatic_energy(double d, const SphereGeometry& geom, const VoltageConfig& volts);

// Small-separation form 2 pi eps0 R (ln(R/d) + ln 2 + 23/20 + theta/63).
double smallsep_capacitance(double d, const SphereGeometry& geom, ThetaParameter theta);

// Leading (proximity-force) terms.
double pfa_capacitance(double d, const SphereGeometry& geom);
double pfa_force_norm(double d, const SphereGeometry& geom);

// Perturbative force expansion 2 pi eps0 sum_k c_k (d/R)^k, k = -1..6.
double expansion_force_norm(double d, const SphereGeometry& geom,
                            const ExpansionCoefficients& coeffs = ExpansionCoefficients::standard());

// Antiderivative form of the expansion. table_compat flips the sign of the
// power sum, reproducing the published comparison-table column that is
// inconsistent with the expansion as printed; the default evaluates the
// form verbatim.
double expansion_capacitance(double d, const SphereGeometry& geom, ThetaParameter theta,
                             bool table_compat = false,
                             const ExpansionCoefficients& coeffs = ExpansionCoefficients::standard());

// Two-sector modified lens.
double modified_force_norm(double d, const ModifiedLensGeometry& geom);
double modified_capacitance(double d, const ModifiedLensGeometry& geom, double c_tilde);

// Power-law approximation of the modified capacitance at 30-100 nm, with
// the published constants (integration constant excluded).
double modified_capacitance_small(double d, const ModifiedLensGeometry& geom);

// Two-term large-separation asymptote of the modified capacitance.
double modified_capacitance_large(double d, const ModifiedLensGeometry& geom, double c_tilde);

// Linear background C^p(d) = a1 - a2 d.
double parasitic_capacitance(double d, const ParasiticParams& params);

}  // namespace capcal::models

#endif
