#ifndef CAPCAL_CALIBRATION_HPP
#define CAPCAL_CALIBRATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "capcal/dataset.hpp"
#include "capcal/model_spec.hpp"

namespace capcal::calib {

// d = beta (V0_PZT - V_PZT). May be negative; negativity is the caller's
// signal, not an error here.
struct PiezoCalibration {
  PiezoCalibration(double beta_m_per_v, double v0_pzt_v);
  double beta;    // m/V, > 0
  double v0_pzt;  // V
};

double piezo_to_separation(double v_pzt, const PiezoCalibration& calib);

struct Chi2Result {
  double chi2 = 0.0;
  std::size_t included = 0;
  std::size_t excluded = 0;  // points whose separation the model cannot evaluate
};

// Compensated sum of squared weighted residuals over the evaluable points,
// in canonical (abscissa-sorted) order so the value is permutation
// invariant. Piezo datasets require a calibration. Throws
// empty_objective_error when every point is excluded.
Chi2Result chi_squared(const Dataset& ds, const models::CapacitanceModelSpec& spec,
                       const std::optional<PiezoCalibration>& calib = std::nullopt);

// Fit families: a model shape whose free parameters enter linearly once the
// structural geometry (and, for piezo data, V0_PZT) is fixed.
struct ExactParasiticFamily {
  SphereGeometry geom;  // fits a1, a2 of the parasitic add-on
};
struct PfaParasiticFamily {
  SphereGeometry geom;  // fits a1, a2 of the parasitic add-on
};
struct ModifiedLensFamily {
  ModifiedLensGeometry geom;  // fits the integration constant c_tilde
};
struct IdealLogFamily {
  SphereGeometry geom;  // fits a1, a3 of a1 + a3 ln(R/d)
};
struct PowerLawFamily {};  // fits a1, a3 of a1 + a3 d^0.3

using FitFamily = std::variant<ExactParasiticFamily, PfaParasiticFamily, ModifiedLensFamily,
                               IdealLogFamily, PowerLawFamily>;

std::string family_label(const FitFamily& family);

struct FitParam {
  std::string name;
  double value = 0.0;
  double sigma = 0.0;
  std::string unit;  // SI unit of value/sigma
};

struct FitInputs {
  std::optional<double> beta;   // m/V, fixed input, not propagated
  std::optional<double> theta;
  std::optional<std::uint64_t> seed;
  double minimizer_tol = 1e-10;
};

struct FitResult {
  explicit FitResult(models::CapacitanceModelSpec fitted_model) : model(std::move(fitted_model)) {}
  models::CapacitanceModelSpec model;  // family with fitted parameters substituted
  std::vector<FitParam> params;
  double chi2 = 0.0;
  std::size_t dof = 0;
  double reduced_chi2 = 0.0;
  double p_value = 0.0;
  std::size_t excluded_points = 0;
  bool converged = true;
  std::string diagnostics;                            // non-convergence reason, if any
  std::vector<std::pair<double, double>> profile;     // (V0 candidate, chi2) trace
  FitInputs inputs;
};

// Exact weighted linear solve of the family against the dataset. Piezo
// datasets need a calibration with a fixed contact voltage.
FitResult fit_linear(const Dataset& ds, const FitFamily& family,
                     const std::optional<PiezoCalibration>& calib = std::nullopt);

// Profiles chi^2 over the contact voltage V0_PZT (outer Brent minimization,
// inner exact linear solve), for piezo-voltage datasets. The V0 uncertainty
// comes from the profile curvature, sigma = sqrt(2 / d2chi2/dV0^2). A
// boundary-pinned minimum is reported as non-converged with the profile
// trace attached, not thrown.
FitResult fit_with_contact_voltage(const Dataset& ds, const FitFamily& family, double beta,
                                   std::pair<double, double> v0_bounds, double tol = 1e-10);

// Deterministic synthetic dataset: truth model plus Gaussian noise from a
// counter-based generator (see synth_generator_name()).
struct SynthSpec {
  explicit SynthSpec(models::CapacitanceModelSpec truth_model) : truth(std::move(truth_model)) {}
  models::CapacitanceModelSpec truth;
  AbscissaKind kind = AbscissaKind::Separation;
  std::vector<double> abscissae;           // m or V
  std::vector<double> sigma;               // F; size 1 (homoscedastic) or one per point
  std::optional<PiezoCalibration> calib;   // required for piezo designs
  std::uint64_t seed = 0;
  std::string label;
};

Dataset generate_synthetic(const SynthSpec& spec);

// Name and version of the noise generator, pinned so datasets are
// reproducible across machines.
std::string synth_generator_name();

// Unweighted least squares of a1 + a3 (d/radius)^0.3 against an arbitrary
// capacitance curve on a uniform separation grid.
std::pair<double, double> fit_power_law(const std::function<double(double)>& capacitance,
                                        double radius, double d_lo, double d_hi,
                                        std::size_t grid_points = 200);

// The same fit against the exact modified capacitance (c_tilde = 0); the
// default window is the approximation's published validity region.
std::pair<double, double> refit_power_law_constants(const ModifiedLensGeometry& geom,
                                                    double d_lo = 30e-9, double d_hi = 100e-9);

}  // namespace capcal::calib

#endif
