#include "capcal/report.hpp"

#include <json.hpp>
#include <sstream>

#include "capcal/constants.hpp"
#include "capcal/errors.hpp"

namespace capcal::calib {

namespace {

using nlohmann::json;

constexpr const char* library_version = "0.1.0";

json lens_to_json(const ModifiedLensGeometry& g) {
  return json{{"r_m", g.r},
              {"r1_m", g.r1},
              {"r2_m", g.r2},
              {"h_small_m", g.h_small},
              {"h_large_m", g.h_large}};
}

ModifiedLensGeometry lens_from_json(const json& j) {
  return ModifiedLensGeometry(j.at("r_m").get<double>(), j.at("r1_m").get<double>(),
                              j.at("r2_m").get<double>(), j.at("h_small_m").get<double>(),
                              j.at("h_large_m").get<double>());
}

json model_to_json(const models::CapacitanceModelSpec& spec) {
  json j = std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, models::ExactSphereModel>) {
          return json{{"kind", "exact-sphere"}, {"radius_m", m.geom.radius}};
        } else if constexpr (std::is_same_v<T, models::PfaLeadingModel>) {
          return json{{"kind", "pfa"}, {"radius_m", m.geom.radius}};
        } else if constexpr (std::is_same_v<T, models::SmallSepLogModel>) {
          return json{{"kind", "smallsep-log"},
                      {"radius_m", m.geom.radius},
                      {"theta", m.theta.value}};
        } else if constexpr (std::is_same_v<T, models::ExpansionModel>) {
          return json{{"kind", "expansion"},
                      {"radius_m", m.geom.radius},
                      {"theta", m.theta.value},
                      {"table_compat", m.table_compat}};
        } else if constexpr (std::is_same_v<T, models::ModifiedLensModel>) {
          return json{{"kind", "modified-lens"},
                      {"lens", lens_to_json(m.geom)},
                      {"c_tilde_f", m.c_tilde}};
        } else if constexpr (std::is_same_v<T, models::PowerLawModel>) {
          return json{{"kind", "power-law"}, {"a1_f", m.a1}, {"a3_f_per_m03", m.a3}};
        } else {
          static_assert(std::is_same_v<T, models::IdealLogModel>);
          return json{{"kind", "ideal-log"},
                      {"a1_f", m.a1},
                      {"a3_f", m.a3},
                      {"radius_m", m.geom.radius}};
        }
      },
      spec.variant());
  if (spec.parasitic()) {
    j["parasitic"] = json{{"a1_f", spec.parasitic()->a1}, {"a2_f_per_m", spec.parasitic()->a2}};
  } else {
    j["parasitic"] = nullptr;
  }
  return j;
}

models::CapacitanceModelSpec model_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  using Spec = models::CapacitanceModelSpec;
  std::optional<Spec> spec;
  if (kind == "exact-sphere") {
    spec = Spec::exact_sphere(SphereGeometry(j.at("radius_m").get<double>()));
  } else if (kind == "pfa") {
    spec = Spec::pfa_leading(SphereGeometry(j.at("radius_m").get<double>()));
  } else if (kind == "smallsep-log") {
    spec = Spec::smallsep_log(SphereGeometry(j.at("radius_m").get<double>()),
                              ThetaParameter(j.at("theta").get<double>()));
  } else if (kind == "expansion") {
    spec = Spec::expansion(SphereGeometry(j.at("radius_m").get<double>()),
                           ThetaParameter(j.at("theta").get<double>()),
                           j.at("table_compat").get<bool>());
  } else if (kind == "modified-lens") {
    spec = Spec::modified_lens(lens_from_json(j.at("lens")), j.at("c_tilde_f").get<double>());
  } else if (kind == "power-law") {
    spec = Spec::power_law(j.at("a1_f").get<double>(), j.at("a3_f_per_m03").get<double>());
  } else if (kind == "ideal-log") {
    spec = Spec::ideal_log(j.at("a1_f").get<double>(), j.at("a3_f").get<double>(),
                           SphereGeometry(j.at("radius_m").get<double>()));
  } else {
    throw error("unknown model kind '" + kind + "' in fit report");
  }
  if (!j.at("parasitic").is_null()) {
    const json& p = j.at("parasitic");
    spec = spec->with_parasitic(
        ParasiticParams(p.at("a1_f").get<double>(), p.at("a2_f_per_m").get<double>()));
  }
  return *spec;
}

json inputs_to_json(const FitInputs& in) {
  json j;
  j["beta"] = in.beta ? json(*in.beta) : json(nullptr);
  j["theta"] = in.theta ? json(*in.theta) : json(nullptr);
  j["seed"] = in.seed ? json(*in.seed) : json(nullptr);
  j["tolerances"] = json{{"minimizer_tol", in.minimizer_tol}, {"series_rel_tol", 1e-13}};
  return j;
}

}  // namespace

std::string fit_report_json(const FitResult& fit) {
  json j;
  j["model"] = model_to_json(fit.model);
  json params = json::array();
  for (const FitParam& p : fit.params) {
    params.push_back(
        json{{"name", p.name}, {"value", p.value}, {"sigma", p.sigma}, {"unit", p.unit}});
  }
  j["params"] = params;
  j["chi2"] = fit.chi2;
  j["dof"] = fit.dof;
  j["reduced_chi2"] = fit.reduced_chi2;
  j["p_value"] = fit.p_value;
  j["excluded_points"] = fit.excluded_points;
  j["converged"] = fit.converged;
  j["diagnostics"] = fit.diagnostics;
  j["inputs"] = inputs_to_json(fit.inputs);
  j["versions"] = json{{"library", library_version},
                       {"report_format", report_format_version},
                       {"noise_generator", synth_generator_name()}};
  return j.dump(2) + "\n";
}

FitResult parse_fit_report_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw error(std::string("fit report is not valid JSON: ") + e.what());
  }
  try {
    FitResult fit{model_from_json(j.at("model"))};
    for (const json& p : j.at("params")) {
      fit.params.push_back(FitParam{p.at("name").get<std::string>(), p.at("value").get<double>(),
                                    p.at("sigma").get<double>(), p.at("unit").get<std::string>()});
    }
    fit.chi2 = j.at("chi2").get<double>();
    fit.dof = j.at("dof").get<std::size_t>();
    fit.reduced_chi2 = j.at("reduced_chi2").get<double>();
    fit.p_value = j.at("p_value").get<double>();
    fit.excluded_points = j.at("excluded_points").get<std::size_t>();
    fit.converged = j.at("converged").get<bool>();
    fit.diagnostics = j.at("diagnostics").get<std::string>();
    const json& in = j.at("inputs");
    if (!in.at("beta").is_null()) fit.inputs.beta = in.at("beta").get<double>();
    if (!in.at("theta").is_null()) fit.inputs.theta = in.at("theta").get<double>();
    if (!in.at("seed").is_null()) fit.inputs.seed = in.at("seed").get<std::uint64_t>();
    fit.inputs.minimizer_tol = in.at("tolerances").at("minimizer_tol").get<double>();
    return fit;
  } catch (const json::exception& e) {
    throw error(std::string("fit report is missing fields: ") + e.what());
  }
}

std::string fit_report_text(const FitResult& fit) {
  std::ostringstream os;
  os.precision(12);
  os << "fit: " << models::model_label(fit.model) << "\n";
  for (const FitParam& p : fit.params) {
    // Capacitance-like parameters read naturally in pF.
    if (p.unit == "F") {
      os << "  " << p.name << " = " << p.value * units::pf_per_f << " +- "
         << p.sigma * units::pf_per_f << " pF\n";
    } else if (p.unit == "F/m") {
      os << "  " << p.name << " = " << p.value * units::pf_per_f * units::m_per_um << " +- "
         << p.sigma * units::pf_per_f * units::m_per_um << " pF/um\n";
    } else {
      os << "  " << p.name << " = " << p.value << " +- " << p.sigma << " " << p.unit << "\n";
    }
  }
  os << "  chi2 = " << fit.chi2 << "\n";
  os << "  dof = " << fit.dof << "\n";
  os << "  reduced_chi2 = " << fit.reduced_chi2 << "\n";
  os << "  p_value = " << fit.p_value << "\n";
  os << "  excluded_points = " << fit.excluded_points << "\n";
  if (!fit.converged) os << "  NOT CONVERGED: " << fit.diagnostics << "\n";
  return os.str();
}

std::string synth_sidecar_json(const SynthSpec& spec) {
  json j;
  j["truth_model"] = model_to_json(spec.truth);
  j["kind"] = spec.kind == AbscissaKind::PiezoVoltage ? "piezo_volts" : "separation_m";
  j["abscissae"] = spec.abscissae;
  j["sigma_f"] = spec.sigma;
  if (spec.calib) {
    j["calibration"] = json{{"beta_m_per_v", spec.calib->beta}, {"v0_pzt", spec.calib->v0_pzt}};
  } else {
    j["calibration"] = nullptr;
  }
  j["seed"] = spec.seed;
  j["label"] = spec.label;
  j["generator"] = synth_generator_name();
  j["versions"] =
      json{{"library", library_version}, {"report_format", report_format_version}};
  return j.dump(2) + "\n";
}

}  // namespace capcal::calib
