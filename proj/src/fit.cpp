#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "capcal/calibration.hpp"
#include "capcal/constants.hpp"
#include "capcal/errors.hpp"
#include "capcal/numerics.hpp"

namespace capcal::calib {

PiezoCalibration::PiezoCalibration(double beta_m_per_v, double v0_pzt_v)
    : beta(beta_m_per_v), v0_pzt(v0_pzt_v) {
  if (!(beta_m_per_v > 0.0)) throw domain_error("beta", beta_m_per_v, "must be > 0");
  if (!std::isfinite(v0_pzt_v)) throw domain_error("V0_PZT", v0_pzt_v, "must be finite");
}

double piezo_to_separation(double v_pzt, const PiezoCalibration& calib) {
  return calib.beta * (calib.v0_pzt - v_pzt);
}

namespace {

// Points in a canonical (abscissa-sorted) order so compensated sums are
// permutation invariant.
std::vector<Measurement> canonical_points(const Dataset& ds) {
  std::vector<Measurement> pts = ds.points;
  std::sort(pts.begin(), pts.end(), [](const Measurement& a, const Measurement& b) {
    return std::tie(a.x, a.capacitance, a.sigma) < std::tie(b.x, b.capacitance, b.sigma);
  });
  return pts;
}

double transform_abscissa(double x, AbscissaKind kind,
                          const std::optional<PiezoCalibration>& calib) {
  if (kind == AbscissaKind::PiezoVoltage) {
    if (!calib) throw error("piezo-voltage dataset requires a piezo calibration");
    return piezo_to_separation(x, *calib);
  }
  return x;
}

// Linear structure of a family: fixed offset term plus basis columns whose
// coefficients are the fitted parameters.
struct FamilyDesign {
  std::size_t param_count;
  std::vector<std::string> names;
  std::vector<std::string> units;
  std::function<double(double)> offset;                     // F at separation d
  std::function<void(double, double*)> basis;               // fills param_count values
  std::function<models::CapacitanceModelSpec(const std::vector<double>&)> build;
};

FamilyDesign make_design(const FitFamily& family) {
  return std::visit(
      [](const auto& fam) -> FamilyDesign {
        using T = std::decay_t<decltype(fam)>;
        FamilyDesign d;
        if constexpr (std::is_same_v<T, ExactParasiticFamily>) {
          auto geom = fam.geom;
          d.param_count = 2;
          d.names = {"A1_tilde", "A2_tilde"};
          d.units = {"F", "F/m"};
          d.offset = [geom](double x) { return models::exact_capacitance(x, geom); };
          d.basis = [](double x, double* out) {
            out[0] = 1.0;
            out[1] = -x;
          };
          d.build = [geom](const std::vector<double>& p) {
            return models::CapacitanceModelSpec::exact_sphere(geom).with_parasitic(
                ParasiticParams(p[0], p[1]));
          };
        } else if constexpr (std::is_same_v<T, PfaParasiticFamily>) {
          auto geom = fam.geom;
          d.param_count = 2;
          d.names = {"A1_tilde", "A2_tilde"};
          d.units = {"F", "F/m"};
          d.offset = [geom](double x) { return models::pfa_capacitance(x, geom); };
          d.basis = [](double x, double* out) {
            out[0] = 1.0;
            out[1] = -x;
          };
          d.build = [geom](const std::vector<double>& p) {
            return models::CapacitanceModelSpec::pfa_leading(geom).with_parasitic(
                ParasiticParams(p[0], p[1]));
          };
        } else if constexpr (std::is_same_v<T, ModifiedLensFamily>) {
          auto geom = fam.geom;
          d.param_count = 1;
          d.names = {"C_tilde"};
          d.units = {"F"};
          d.offset = [geom](double x) { return models::modified_capacitance(x, geom, 0.0); };
          d.basis = [](double, double* out) { out[0] = 1.0; };
          d.build = [geom](const std::vector<double>& p) {
            return models::CapacitanceModelSpec::modified_lens(geom, p[0]);
          };
        } else if constexpr (std::is_same_v<T, IdealLogFamily>) {
          auto geom = fam.geom;
          d.param_count = 2;
          d.names = {"A1_id", "A3_id"};
          d.units = {"F", "F"};
          d.offset = [](double) { return 0.0; };
          d.basis = [geom](double x, double* out) {
            if (!(x > 0.0)) throw domain_error("separation d", x, "must be > 0");
            out[0] = 1.0;
            out[1] = std::log(geom.radius / x);
          };
          d.build = [geom](const std::vector<double>& p) {
            return models::CapacitanceModelSpec::ideal_log(p[0], p[1], geom);
          };
        } else {
          static_assert(std::is_same_v<T, PowerLawFamily>);
          d.param_count = 2;
          d.names = {"A1_mod_tilde", "A3_mod_tilde"};
          d.units = {"F", "F*m^-0.3"};
          d.offset = [](double) { return 0.0; };
          d.basis = [](double x, double* out) {
            if (!(x >= 0.0)) throw domain_error("separation d", x, "must be >= 0");
            out[0] = 1.0;
            out[1] = std::pow(x, 0.3);
          };
          d.build = [](const std::vector<double>& p) {
            return models::CapacitanceModelSpec::power_law(p[0], p[1]);
          };
        }
        return d;
      },
      family);
}

}  // namespace

std::string family_label(const FitFamily& family) {
  return std::visit(
      [](const auto& fam) -> std::string {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, ExactParasiticFamily>)
          return "exact-parasitic";
        else if constexpr (std::is_same_v<T, PfaParasiticFamily>)
          return "pfa-parasitic";
        else if constexpr (std::is_same_v<T, ModifiedLensFamily>)
          return "modified-lens";
        else if constexpr (std::is_same_v<T, IdealLogFamily>)
          return "ideal-log";
        else
          return "power-law";
      },
      family);
}

Chi2Result chi_squared(const Dataset& ds, const models::CapacitanceModelSpec& spec,
                       const std::optional<PiezoCalibration>& calib) {
  if (ds.points.empty()) throw empty_objective_error("dataset is empty");
  Chi2Result result;
  num::CompensatedSum sum;
  for (const Measurement& m : canonical_points(ds)) {
    if (!(m.sigma > 0.0)) throw domain_error("sigma", m.sigma, "must be > 0");
    double d = transform_abscissa(m.x, ds.kind, calib);
    double model;
    try {
      model = models::evaluate_model(spec, d);
    } catch (const domain_error&) {
      ++result.excluded;
      continue;
    }
    double r = (m.capacitance - model) / m.sigma;
    sum.add(r * r);
    ++result.included;
  }
  if (result.included == 0)
    throw empty_objective_error("all " + std::to_string(result.excluded) +
                                " points were excluded (model not evaluable at any abscissa)");
  result.chi2 = sum.value();
  return result;
}

FitResult fit_linear(const Dataset& ds, const FitFamily& family,
                     const std::optional<PiezoCalibration>& calib) {
  if (ds.points.empty()) throw empty_objective_error("dataset is empty");
  FamilyDesign design = make_design(family);
  std::vector<Measurement> pts = canonical_points(ds);

  std::vector<double> y, sigma;
  std::vector<std::array<double, 4>> rows;  // basis values, up to 4 columns
  std::size_t excluded = 0;
  for (const Measurement& m : pts) {
    if (!(m.sigma > 0.0)) throw domain_error("sigma", m.sigma, "must be > 0");
    double d = transform_abscissa(m.x, ds.kind, calib);
    std::array<double, 4> row{};
    double offset;
    try {
      offset = design.offset(d);
      design.basis(d, row.data());
    } catch (const domain_error&) {
      ++excluded;
      continue;
    }
    rows.push_back(row);
    y.push_back(m.capacitance - offset);
    sigma.push_back(m.sigma);
  }

  if (y.empty())
    throw empty_objective_error("all " + std::to_string(excluded) +
                                " points were excluded (family not evaluable at any abscissa)");
  if (y.size() <= design.param_count)
    throw error("fit needs more evaluable points (" + std::to_string(y.size()) +
                ") than parameters (" + std::to_string(design.param_count) + ")");

  num::DesignMatrix x(y.size(), design.param_count);
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < design.param_count; ++j) x.at(i, j) = rows[i][j];

  num::WlsSolution wls = num::weighted_linear_least_squares(x, y, sigma);

  FitResult fit{design.build(wls.params)};
  for (std::size_t j = 0; j < design.param_count; ++j) {
    fit.params.push_back(FitParam{design.names[j], wls.params[j],
                                  std::sqrt(std::max(0.0, wls.covariance[j][j])),
                                  design.units[j]});
  }
  fit.chi2 = wls.residual_chi2;
  fit.dof = y.size() - design.param_count;
  fit.reduced_chi2 = fit.chi2 / static_cast<double>(fit.dof);
  fit.p_value = num::chi2_p_value(fit.chi2, fit.dof);
  fit.excluded_points = excluded;
  if (calib) fit.inputs.beta = calib->beta;
  return fit;
}

FitResult fit_with_contact_voltage(const Dataset& ds, const FitFamily& family, double beta,
                                   std::pair<double, double> v0_bounds, double tol) {
  if (ds.kind != AbscissaKind::PiezoVoltage)
    throw error("contact-voltage fit requires a piezo-voltage dataset");
  auto [lo, hi] = v0_bounds;
  if (!(lo < hi)) throw domain_error("V0 bracket width", hi - lo, "requires lo < hi");

  std::vector<std::pair<double, double>> profile;
  auto profile_chi2 = [&](double v0) {
    double chi2 = fit_linear(ds, family, PiezoCalibration(beta, v0)).chi2;
    profile.emplace_back(v0, chi2);
    return chi2;
  };

  auto non_converged = [&](const std::string& why) {
    FamilyDesign design = make_design(family);
    FitResult fit{design.build(std::vector<double>(design.param_count, 0.0))};
    fit.converged = false;
    fit.diagnostics = why;
    fit.profile = profile;
    fit.inputs.beta = beta;
    fit.inputs.minimizer_tol = tol;
    fit.chi2 = 0.0;
    fit.dof = 1;
    fit.reduced_chi2 = 0.0;
    fit.p_value = 1.0;
    return fit;
  };

  num::ScalarMinimum min;
  try {
    min = num::minimize_scalar(profile_chi2, lo, hi, tol);
  } catch (const error& e) {
    return non_converged(std::string("profile evaluation failed: ") + e.what());
  }

  double margin = 1e-6 * (hi - lo) + 2.0 * tol;
  bool pinned = (min.x - lo) < margin || (hi - min.x) < margin;

  FitResult fit = fit_linear(ds, family, PiezoCalibration(beta, min.x));
  // V0 is a fitted parameter; it costs one degree of freedom.
  std::size_t included = fit.dof + fit.params.size();
  if (included <= fit.params.size() + 1)
    throw error("fit needs more evaluable points than parameters");
  fit.dof = included - fit.params.size() - 1;
  fit.reduced_chi2 = fit.chi2 / static_cast<double>(fit.dof);
  fit.p_value = num::chi2_p_value(fit.chi2, fit.dof);

  // 1-sigma of V0 from the profile curvature, sigma = sqrt(2 / chi2'').
  double sigma_v0 = 0.0;
  try {
    double h = std::max(1e-4 * std::abs(min.x), 1e-6);
    double curvature = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      double up = profile_chi2(min.x + h);
      double down = profile_chi2(min.x - h);
      curvature = (up - 2.0 * fit.chi2 + down) / (h * h);
      if (std::abs(up - fit.chi2) + std::abs(down - fit.chi2) >
          1e-9 * std::max(1.0, fit.chi2))
        break;
      h *= 4.0;  // profile flat at this step; widen
    }
    if (curvature > 0.0) sigma_v0 = std::sqrt(2.0 / curvature);
  } catch (const error&) {
    // curvature probe stepped where the fit is not evaluable; leave
    // sigma_v0 at zero and report below
  }

  fit.params.push_back(FitParam{"V0_PZT", min.x, sigma_v0, "V"});
  fit.profile = std::move(profile);
  fit.inputs.beta = beta;
  fit.inputs.minimizer_tol = tol;
  if (pinned) {
    fit.converged = false;
    std::ostringstream os;
    os << "profile minimum pinned at bracket boundary (V0 = " << min.x << ", bracket [" << lo
       << ", " << hi << "])";
    fit.diagnostics = os.str();
  } else if (!min.converged) {
    fit.converged = false;
    fit.diagnostics = "scalar minimizer hit its iteration cap";
  } else if (sigma_v0 == 0.0) {
    fit.converged = false;
    fit.diagnostics = "profile curvature at the minimum is not positive";
  }
  return fit;
}

std::pair<double, double> fit_power_law(const std::function<double(double)>& capacitance,
                                        double radius, double d_lo, double d_hi,
                                        std::size_t grid_points) {
  if (!(radius > 0.0)) throw domain_error("radius", radius, "must be > 0");
  if (!(d_lo > 0.0)) throw domain_error("d_lo", d_lo, "must be > 0");
  if (!(d_hi > d_lo)) throw domain_error("d_hi", d_hi, "must be > d_lo");
  if (grid_points < 3)
    throw domain_error("grid_points", static_cast<double>(grid_points), "must be >= 3");
  num::DesignMatrix x(grid_points, 2);
  std::vector<double> y(grid_points), sigma(grid_points, 1.0);
  for (std::size_t i = 0; i < grid_points; ++i) {
    double d = d_lo + (d_hi - d_lo) * static_cast<double>(i) / (grid_points - 1);
    x.at(i, 0) = 1.0;
    x.at(i, 1) = std::pow(d / radius, 0.3);
    y[i] = capacitance(d);
  }
  num::WlsSolution wls = num::weighted_linear_least_squares(x, y, sigma);
  return {wls.params[0], wls.params[1]};
}

std::pair<double, double> refit_power_law_constants(const ModifiedLensGeometry& geom, double d_lo,
                                                    double d_hi) {
  return fit_power_law([&](double d) { return models::modified_capacitance(d, geom, 0.0); },
                       geom.r, d_lo, d_hi);
}

}  // namespace capcal::calib
