// capcal command-line tool: model evaluation, comparison tables, lens
// curves, chi^2 fits, synthetic datasets and effective-exponent analysis,
// all through the capcal C API.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "capcal.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPfPerF = 1e12;
constexpr double kFPerPf = 1e-12;
constexpr double kMPerUm = 1e-6;
constexpr double kMPerNm = 1e-9;

// Exit codes: 2 flag errors, 3 domain/convergence errors, 4 fit
// non-convergence, 5 I/O, 6 dataset format violations.
int exit_code_for(capcal_status status) {
  switch (status) {
    case CAPCAL_OK:
      return 0;
    case CAPCAL_ERR_INVALID_ARGUMENT:
      return 2;
    case CAPCAL_ERR_DOMAIN:
    case CAPCAL_ERR_CONVERGENCE:
    case CAPCAL_ERR_SINGULAR:
    case CAPCAL_ERR_EMPTY_OBJECTIVE:
      return 3;
    case CAPCAL_ERR_IO:
      return 5;
    case CAPCAL_ERR_FORMAT:
      return 6;
    default:
      return 1;
  }
}

int fail(capcal_status status, const std::string& context) {
  std::cerr << "capcal: error";
  if (!context.empty()) std::cerr << " (" << context << ")";
  std::cerr << ": " << capcal_last_error() << "\n";
  return exit_code_for(status);
}

struct ModelDeleter {
  void operator()(capcal_model* m) const { capcal_model_free(m); }
};
using ModelPtr = std::unique_ptr<capcal_model, ModelDeleter>;
struct DatasetDeleter {
  void operator()(capcal_dataset* d) const { capcal_dataset_free(d); }
};
using DatasetPtr = std::unique_ptr<capcal_dataset, DatasetDeleter>;
struct FitDeleter {
  void operator()(capcal_fit* f) const { capcal_fit_free(f); }
};
using FitPtr = std::unique_ptr<capcal_fit, FitDeleter>;

// Shared model flags. Lengths at the CLI boundary are um/nm, capacitances
// pF, matching how the underlying results are usually quoted.
struct ModelFlags {
  std::string model = "exact";
  double r_um = 151.3;
  double lens_r_mm = 30.9;
  double lens_r1_mm = 49.4;
  double lens_r2_um = 30.0;
  double lens_h_nm = 8.0;
  double lens_cap_h_nm = 250.0;
  double theta = 0.5;
  bool table_compat = false;
  double c_tilde_pf = 0.0;
  double a1_pf = 222.96;    // power-law / ideal-log intercept
  double a3 = -346.2;       // power-law: pF m^-0.3; ideal-log: pF
  bool ideal_defaults = true;
  bool parasitic_given = false;
  std::optional<double> parasitic_a1_pf;
  double parasitic_a2_pf_per_um = 0.0;

  capcal_lens_geometry lens() const {
    return {lens_r_mm * 1e-3, lens_r1_mm * 1e-3, lens_r2_um * kMPerUm, lens_h_nm * kMPerNm,
            lens_cap_h_nm * kMPerNm};
  }

  void add_to(CLI::App* cmd, bool with_model_choice = true) {
    if (with_model_choice)
      cmd->add_option("--model", model,
                      "Model: exact|pfa|smallsep|expansion|modified|powerlaw|ideallog "
                      "(ideallog takes its radius from --lens-R-mm)")
          ->check(CLI::IsMember(
              {"exact", "pfa", "smallsep", "expansion", "modified", "powerlaw", "ideallog"}));
    cmd->add_option("--R-um", r_um, "Sphere radius, um")->capture_default_str();
    cmd->add_option("--lens-R-mm", lens_r_mm, "Lens nominal radius, mm")->capture_default_str();
    cmd->add_option("--lens-R1-mm", lens_r1_mm, "Lens outer-sector radius, mm")
        ->capture_default_str();
    cmd->add_option("--lens-R2-um", lens_r2_um, "Lens inner-sector radius, um")
        ->capture_default_str();
    cmd->add_option("--lens-h-nm", lens_h_nm, "Inner-sector height, nm")->capture_default_str();
    cmd->add_option("--lens-H-nm", lens_cap_h_nm, "Outer-sector height, nm")
        ->capture_default_str();
    cmd->add_option("--theta", theta, "Shape parameter in [0,1]")->capture_default_str();
    cmd->add_flag("--table-compat", table_compat,
                  "Expansion capacitance in table-compat mode (sign-flipped power sum)");
    cmd->add_option("--c-tilde-pF", c_tilde_pf, "Integration constant for the modified lens, pF")
        ->capture_default_str();
    cmd->add_option("--A1-pF", a1_pf, "Power-law / ideal-log intercept, pF")
        ->capture_default_str()
        ->each([this](const std::string&) { ideal_defaults = false; });
    cmd->add_option("--A3", a3, "Power-law slope (pF m^-0.3) or ideal-log coefficient (pF)")
        ->capture_default_str()
        ->each([this](const std::string&) { ideal_defaults = false; });
    cmd->add_option("--parasitic-A1-pF", parasitic_a1_pf, "Parasitic constant, pF")
        ->each([this](const std::string&) { parasitic_given = true; });
    cmd->add_option("--parasitic-A2-pF-per-um", parasitic_a2_pf_per_um,
                    "Parasitic gradient, pF/um")
        ->capture_default_str();
  }

  capcal_status make(ModelPtr& out) const {
    capcal_model* m = nullptr;
    capcal_status s = CAPCAL_ERR_INVALID_ARGUMENT;
    double r = r_um * kMPerUm;
    if (model == "exact") {
      s = capcal_model_create_exact_sphere(r, &m);
    } else if (model == "pfa") {
      s = capcal_model_create_pfa(r, &m);
    } else if (model == "smallsep") {
      s = capcal_model_create_smallsep(r, theta, &m);
    } else if (model == "expansion") {
      s = capcal_model_create_expansion(r, theta, table_compat ? 1 : 0, &m);
    } else if (model == "modified") {
      s = capcal_model_create_modified_lens(lens(), c_tilde_pf * kFPerPf, &m);
    } else if (model == "powerlaw") {
      s = capcal_model_create_power_law(a1_pf * kFPerPf, a3 * kFPerPf, &m);
    } else if (model == "ideallog") {
      // defaults differ from the power-law defaults; swap in the reported
      // ideal-sphere fit when the user did not override
      double a1 = (ideal_defaults ? 199.3 : a1_pf) * kFPerPf;
      double a3v = (ideal_defaults ? 1.757 : a3) * kFPerPf;
      s = capcal_model_create_ideal_log(a1, a3v, lens_r_mm * 1e-3, &m);
    } else {
      return CAPCAL_ERR_INVALID_ARGUMENT;
    }
    if (s != CAPCAL_OK) return s;
    if (parasitic_a1_pf) {
      s = capcal_model_set_parasitic(m, *parasitic_a1_pf * kFPerPf,
                                     parasitic_a2_pf_per_um * kFPerPf / kMPerUm);
      if (s != CAPCAL_OK) {
        capcal_model_free(m);
        return s;
      }
    }
    out.reset(m);
    return CAPCAL_OK;
  }
};

// Optional override of the default output directory; the only environment
// configuration the tool honors.
fs::path resolve_output(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("CAPCAL_OUTPUT_DIR")) p = fs::path(dir) / p;
  }
  return p;
}

// Atomic write: temp file then rename.
int write_output(const std::string& target, const std::string& content) {
  if (target.empty() || target == "-") {
    std::cout << content;
    return 0;
  }
  fs::path path = resolve_output(target);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "capcal: error: could not open '" << tmp.string() << "' for writing\n";
      return 5;
    }
    out << content;
    out.flush();
    if (!out) {
      std::cerr << "capcal: error: could not write '" << tmp.string() << "'\n";
      return 5;
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::cerr << "capcal: error: could not move '" << tmp.string() << "' into place: "
              << ec.message() << "\n";
    return 5;
  }
  return 0;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    xs[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, n > 1 ? i / double(n - 1) : 0.0);
  return xs;
}

std::vector<double> lin_spaced(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * (n > 1 ? i / double(n - 1) : 0.0);
  return xs;
}

// ---------------------------------------------------------------------------

int run_eval(const ModelFlags& flags, const std::vector<double>& d_um,
             const std::vector<double>& d_nm, double d_min_um, double d_max_um, int samples,
             bool log_grid, const std::string& format, const std::string& output) {
  std::vector<double> separations;  // meters
  for (double d : d_um) separations.push_back(d * kMPerUm);
  for (double d : d_nm) separations.push_back(d * kMPerNm);
  if (separations.empty() && samples > 0 && d_max_um > 0.0) {
    auto grid = log_grid ? log_spaced(d_min_um, d_max_um, samples)
                         : lin_spaced(d_min_um, d_max_um, samples);
    for (double d : grid) separations.push_back(d * kMPerUm);
  }
  if (separations.empty()) {
    std::cerr << "capcal: error: no separations given (use --d-um/--d-nm or a range)\n";
    return 2;
  }

  ModelPtr model;
  if (capcal_status s = flags.make(model); s != CAPCAL_OK) return fail(s, flags.model);

  std::ostringstream os;
  json rows = json::array();
  if (format == "csv") os << "d_nm,C_pF,F_pF_per_m\n";
  for (double d : separations) {
    double c = 0.0, f = 0.0;
    capcal_status s = capcal_model_capacitance(model.get(), d, &c);
    if (s != CAPCAL_OK)
      return fail(s, flags.model + " at d = " + fmt("%.6g", d / kMPerUm) + " um");
    s = capcal_model_force_norm(model.get(), d, &f);
    if (s != CAPCAL_OK)
      return fail(s, flags.model + " at d = " + fmt("%.6g", d / kMPerUm) + " um");

    char note[256];
    if (capcal_model_validity_note(model.get(), d, note, sizeof note) == CAPCAL_OK && note[0])
      std::cerr << "capcal: warning: " << note << "\n";

    if (format == "csv") {
      os << fmt("%.17g", d / kMPerNm) << ',' << fmt("%.17g", c * kPfPerF) << ','
         << fmt("%.17g", f * kPfPerF) << "\n";
    } else if (format == "json") {
      rows.push_back(json{{"d_um", d / kMPerUm},
                          {"C_pF", c * kPfPerF},
                          {"F_pF_per_m", f * kPfPerF}});
    } else {
      os << "d = " << fmt("%.6g", d / kMPerUm) << " um  C = " << fmt("%.5f", c * kPfPerF)
         << " pF  -F/(V-V0)^2 = " << fmt("%.2f", f * kPfPerF) << " pF/m\n";
    }
  }
  if (format == "json") os << rows.dump(2) << "\n";
  return write_output(output, os.str());
}

int run_table(double r_um, std::vector<double> d_um, double theta, bool table_compat,
              const std::string& format, const std::string& output) {
  if (d_um.empty()) d_um = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  double r = r_um * kMPerUm;

  struct Row {
    double d_um, c_exact, c_pfa, c_exp, f_exact, f_pfa, f_exp;
  };
  std::vector<Row> rows;
  for (double dum : d_um) {
    double d = dum * kMPerUm;
    Row row{dum, 0, 0, 0, 0, 0, 0};
    capcal_status s;
    if ((s = capcal_exact_capacitance(d, r, &row.c_exact)) != CAPCAL_OK ||
        (s = capcal_pfa_capacitance(d, r, &row.c_pfa)) != CAPCAL_OK ||
        (s = capcal_expansion_capacitance(d, r, theta, table_compat ? 1 : 0, &row.c_exp)) !=
            CAPCAL_OK ||
        (s = capcal_exact_force_norm(d, r, &row.f_exact)) != CAPCAL_OK ||
        (s = capcal_pfa_force_norm(d, r, &row.f_pfa)) != CAPCAL_OK ||
        (s = capcal_expansion_force_norm(d, r, &row.f_exp)) != CAPCAL_OK) {
      return fail(s, "table at d = " + fmt("%.6g", dum) + " um");
    }
    rows.push_back(row);
  }

  std::ostringstream os;
  if (format == "json") {
    json out = json::array();
    for (const Row& row : rows)
      out.push_back(json{{"d_um", row.d_um},
                         {"C_exact_pF", row.c_exact * kPfPerF},
                         {"C_pfa_pF", row.c_pfa * kPfPerF},
                         {"C_expansion_pF", row.c_exp * kPfPerF},
                         {"F_exact_pF_per_m", row.f_exact * kPfPerF},
                         {"F_pfa_pF_per_m", row.f_pfa * kPfPerF},
                         {"F_expansion_pF_per_m", row.f_exp * kPfPerF}});
    os << out.dump(2) << "\n";
  } else if (format == "csv") {
    os << "d_um,C_exact_pF,C_pfa_pF,C_expansion_pF,F_exact_pF_per_m,F_pfa_pF_per_m,"
          "F_expansion_pF_per_m\n";
    for (const Row& row : rows) {
      os << fmt("%.17g", row.d_um) << ',' << fmt("%.17g", row.c_exact * kPfPerF) << ','
         << fmt("%.17g", row.c_pfa * kPfPerF) << ',' << fmt("%.17g", row.c_exp * kPfPerF) << ','
         << fmt("%.17g", row.f_exact * kPfPerF) << ',' << fmt("%.17g", row.f_pfa * kPfPerF) << ','
         << fmt("%.17g", row.f_exp * kPfPerF) << "\n";
    }
  } else {
    // capacitances to 5 decimals (pF), forces to 2 decimals (pF/m)
    os << "d_um   C_exact_pF  C_pfa_pF  C_expansion_pF  F_exact_pF_per_m  F_pfa_pF_per_m  "
          "F_expansion_pF_per_m\n";
    for (const Row& row : rows) {
      char line[256];
      std::snprintf(line, sizeof line, "%-6.1f %-11.5f %-9.5f %-15.5f %-17.2f %-15.2f %.2f\n",
                    row.d_um, row.c_exact * kPfPerF, row.c_pfa * kPfPerF, row.c_exp * kPfPerF,
                    row.f_exact * kPfPerF, row.f_pfa * kPfPerF, row.f_exp * kPfPerF);
      os << line;
    }
  }
  return write_output(output, os.str());
}

int run_curves(const ModelFlags& flags, double d_min_nm, double d_max_um, int samples,
               const std::string& output) {
  capcal_lens_geometry lens = flags.lens();
  std::ostringstream os;
  os << "# modified-lens capacitance curves (C_small certified 30-100 nm, C_large above 1 um)\n";
  os << "d_nm,C_mod_pF,C_small_pF,C_large_pF\n";
  for (double d : log_spaced(d_min_nm * kMPerNm, d_max_um * kMPerUm, samples)) {
    double c_mod = 0.0, c_small = 0.0, c_large = 0.0;
    capcal_status s;
    if ((s = capcal_modified_capacitance(d, lens, flags.c_tilde_pf * kFPerPf, &c_mod)) !=
            CAPCAL_OK ||
        (s = capcal_modified_capacitance_small(d, lens, &c_small)) != CAPCAL_OK ||
        (s = capcal_modified_capacitance_large(d, lens, 0.0, &c_large)) != CAPCAL_OK) {
      return fail(s, "curves at d = " + fmt("%.6g", d / kMPerNm) + " nm");
    }
    os << fmt("%.17g", d / kMPerNm) << ',' << fmt("%.17g", c_mod * kPfPerF) << ','
       << fmt("%.17g", c_small * kPfPerF) << ',' << fmt("%.17g", c_large * kPfPerF) << "\n";
  }
  return write_output(output, os.str());
}

capcal_family_spec family_from_name(const std::string& name, const ModelFlags& flags) {
  capcal_family_spec family{};
  family.radius_m = flags.r_um * kMPerUm;
  family.lens = flags.lens();
  if (name == "exact-parasitic") {
    family.kind = CAPCAL_FAMILY_EXACT_PARASITIC;
  } else if (name == "pfa-parasitic") {
    family.kind = CAPCAL_FAMILY_PFA_PARASITIC;
  } else if (name == "modified-lens") {
    family.kind = CAPCAL_FAMILY_MODIFIED_LENS;
  } else if (name == "ideal-log") {
    // lens-plane analysis form; the radius inside ln(R/d) is the lens radius
    family.kind = CAPCAL_FAMILY_IDEAL_LOG;
    family.radius_m = flags.lens_r_mm * 1e-3;
  } else {
    family.kind = CAPCAL_FAMILY_POWER_LAW;
  }
  return family;
}

int run_fit(const ModelFlags& flags, const std::string& data_path, const std::string& family_name,
            double beta_nm_per_v, std::optional<double> v0_fixed, std::optional<double> v0_min,
            std::optional<double> v0_max, const std::string& report_path,
            const std::string& format) {
  DatasetPtr ds;
  {
    capcal_dataset* raw = nullptr;
    capcal_status s = capcal_dataset_load_csv(data_path.c_str(), &raw);
    if (s != CAPCAL_OK) return fail(s, "loading '" + data_path + "'");
    ds.reset(raw);
  }

  capcal_family_spec family = family_from_name(family_name, flags);
  double beta = beta_nm_per_v * kMPerNm;
  bool piezo = capcal_dataset_kind(ds.get()) == CAPCAL_KIND_PIEZO_VOLTS;

  FitPtr fit;
  capcal_fit* raw = nullptr;
  capcal_status s;
  if (!piezo) {
    s = capcal_fit_linear(ds.get(), &family, 0, 0.0, 0.0, &raw);
  } else if (v0_fixed) {
    s = capcal_fit_linear(ds.get(), &family, 1, beta, *v0_fixed, &raw);
  } else {
    // default bracket: [max V_PZT - 5, max V_PZT + 10]
    double vmax = -1e300;
    for (size_t i = 0; i < capcal_dataset_size(ds.get()); ++i) {
      double x = 0.0;
      capcal_dataset_point(ds.get(), i, &x, nullptr, nullptr);
      vmax = std::max(vmax, x);
    }
    double lo = v0_min.value_or(vmax - 5.0);
    double hi = v0_max.value_or(vmax + 10.0);
    s = capcal_fit_contact_voltage(ds.get(), &family, beta, lo, hi, &raw);
  }
  if (s != CAPCAL_OK) return fail(s, family_name + " fit of '" + data_path + "'");
  fit.reset(raw);

  char* json_text = nullptr;
  if ((s = capcal_fit_report_json(fit.get(), &json_text)) != CAPCAL_OK) return fail(s, "report");
  std::string report(json_text);
  capcal_string_free(json_text);

  if (!report_path.empty()) {
    if (int rc = write_output(report_path, report); rc != 0) return rc;
  }
  if (format == "json") {
    std::cout << report;
  } else {
    char* text = nullptr;
    if ((s = capcal_fit_report_text(fit.get(), &text)) != CAPCAL_OK) return fail(s, "report");
    std::cout << text;
    capcal_string_free(text);
  }
  return capcal_fit_converged(fit.get()) ? 0 : 4;
}

int run_synth(ModelFlags flags, const std::string& kind, double d_min_nm, double d_max_nm,
              double v_min, double v_max, int n, double sigma_pf, double beta_nm_per_v, double v0,
              std::uint64_t seed, bool noise_free, const std::string& out_path) {
  // The default truth reproduces the torsional-oscillator design: exact
  // sphere plus the reported parasitic background.
  if (!flags.parasitic_given && flags.model == "exact") {
    flags.parasitic_a1_pf = 72.32971;
    flags.parasitic_a2_pf_per_um = 2.18e-4;
  }
  ModelPtr truth;
  if (capcal_status s = flags.make(truth); s != CAPCAL_OK) return fail(s, flags.model);

  bool piezo = kind == "piezo";
  std::vector<double> abscissae = piezo
                                      ? lin_spaced(v_min, v_max, n)
                                      : lin_spaced(d_min_nm * kMPerNm, d_max_nm * kMPerNm, n);
  double sigma = sigma_pf * kFPerPf;

  DatasetPtr ds;
  {
    capcal_dataset* raw = nullptr;
    capcal_status s;
    if (noise_free) {
      // exact model curve with the requested uncertainty column
      std::vector<double> cap(abscissae.size()), sigmas(abscissae.size(), sigma);
      for (size_t i = 0; i < abscissae.size(); ++i) {
        double d = abscissae[i];
        if (piezo &&
            (s = capcal_piezo_to_separation(abscissae[i], beta_nm_per_v * kMPerNm, v0, &d)) !=
                CAPCAL_OK)
          return fail(s, "synthesis");
        if ((s = capcal_model_capacitance(truth.get(), d, &cap[i])) != CAPCAL_OK)
          return fail(s, "synthesis at x = " + fmt("%.6g", abscissae[i]));
      }
      s = capcal_dataset_create(piezo ? CAPCAL_KIND_PIEZO_VOLTS : CAPCAL_KIND_SEPARATION,
                                abscissae.data(), cap.data(), sigmas.data(), abscissae.size(),
                                &raw);
    } else {
      s = capcal_synthesize(truth.get(),
                            piezo ? CAPCAL_KIND_PIEZO_VOLTS : CAPCAL_KIND_SEPARATION,
                            abscissae.data(), abscissae.size(), &sigma, 1,
                            beta_nm_per_v * kMPerNm, v0, seed, &raw);
    }
    if (s != CAPCAL_OK) return fail(s, "synthesis");
    ds.reset(raw);
  }
  fs::path out = resolve_output(out_path);
  if (capcal_status s = capcal_dataset_save_csv(ds.get(), out.c_str()); s != CAPCAL_OK)
    return fail(s, "writing '" + out.string() + "'");

  // sidecar with the full design so the dataset is reproducible
  json sidecar;
  sidecar["truth_model"] = json{{"name", flags.model},
                                {"R_um", flags.r_um},
                                {"theta", flags.theta},
                                {"table_compat", flags.table_compat},
                                {"c_tilde_pF", flags.c_tilde_pf},
                                {"A1_pF", flags.a1_pf},
                                {"A3", flags.a3},
                                {"parasitic_A1_pF", flags.parasitic_a1_pf
                                                        ? json(*flags.parasitic_a1_pf)
                                                        : json(nullptr)},
                                {"parasitic_A2_pF_per_um", flags.parasitic_a2_pf_per_um}};
  sidecar["kind"] = piezo ? "piezo_volts" : "separation_nm";
  sidecar["n"] = n;
  if (piezo) {
    sidecar["v_min"] = v_min;
    sidecar["v_max"] = v_max;
    sidecar["beta_nm_per_v"] = beta_nm_per_v;
    sidecar["v0_pzt"] = v0;
  } else {
    sidecar["d_min_nm"] = d_min_nm;
    sidecar["d_max_nm"] = d_max_nm;
  }
  sidecar["sigma_pF"] = sigma_pf;
  sidecar["seed"] = seed;
  sidecar["noise_free"] = noise_free;
  sidecar["generator"] = capcal_synth_generator();
  sidecar["versions"] = json{{"library", capcal_version()}};
  return write_output(out.string() + ".synth.json", sidecar.dump(2) + "\n");
}

int run_exponent(const ModelFlags& flags, double d_min_nm, double d_max_nm, int points,
                 const std::string& format, const std::string& output) {
  ModelPtr model;
  if (capcal_status s = flags.make(model); s != CAPCAL_OK) return fail(s, flags.model);

  double lo = d_min_nm * kMPerNm, hi = d_max_nm * kMPerNm;
  double exponent = 0.0;
  if (capcal_status s = capcal_effective_exponent(model.get(), lo, hi, points, &exponent);
      s != CAPCAL_OK)
    return fail(s, flags.model + " exponent over [" + fmt("%.6g", d_min_nm) + ", " +
                       fmt("%.6g", d_max_nm) + "] nm");

  std::ostringstream os;
  json rows = json::array();
  for (double d : log_spaced(lo, hi, points)) {
    double g = 0.0;
    if (capcal_status s = capcal_model_force_gradient(model.get(), d, &g); s != CAPCAL_OK)
      return fail(s, "gradient at d = " + fmt("%.6g", d / kMPerNm) + " nm");
    if (format == "json")
      rows.push_back(json{{"d_nm", d / kMPerNm}, {"dF_dd_pF_per_m2", g * kPfPerF}});
    else
      os << fmt("%.17g", d / kMPerNm) << ',' << fmt("%.17g", std::abs(g) * kPfPerF) << "\n";
  }
  if (format == "json") {
    json out{{"model", flags.model}, {"effective_exponent", exponent}, {"gradients", rows}};
    os.str("");
    os << out.dump(2) << "\n";
  } else {
    std::ostringstream head;
    head << "# effective exponent = " << fmt("%.6f", exponent) << "\n"
         << "d_nm,|dF_dd|_pF_per_m2\n";
    os.str(head.str() + os.str());
  }
  int rc = write_output(output, os.str());
  if (rc == 0 && format != "json" && (output.empty() || output == "-"))
    std::cerr << "effective exponent: " << fmt("%.6f", exponent) << "\n";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sphere-plane / lens-plane electrostatic models and capacitance calibration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("capcal ") + capcal_version());

  std::string format = "text";
  std::string output;
  app.add_option("--format", format, "Output format: text|csv|json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  app.add_option("--output", output, "Write output to a file (atomic) instead of stdout");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate capacitance and normalized force");
  ModelFlags eval_flags;
  eval_flags.add_to(eval);
  std::vector<double> d_um, d_nm;
  double d_min_um = 0.5, d_max_um = 0.0;
  int samples = 0;
  bool log_grid = false;
  eval->add_option("--d-um", d_um, "Separation(s), um");
  eval->add_option("--d-nm", d_nm, "Separation(s), nm");
  eval->add_option("--d-min-um", d_min_um, "Range start, um")->capture_default_str();
  eval->add_option("--d-max-um", d_max_um, "Range end, um");
  eval->add_option("--samples", samples, "Number of range samples");
  eval->add_flag("--log", log_grid, "Log-spaced range");

  // table
  auto* table = app.add_subcommand("table", "Exact/PFA/expansion comparison table");
  double table_r_um = 151.3, table_theta = 0.5;
  bool table_compat = false;
  std::vector<double> table_d_um;
  table->add_option("--R-um", table_r_um, "Sphere radius, um")->capture_default_str();
  table->add_option("--d-um", table_d_um, "Separations, um (default 0.5..4.0 step 0.5)");
  table->add_option("--theta", table_theta, "Shape parameter in [0,1]")->capture_default_str();
  table->add_flag("--table-compat", table_compat,
                  "Expansion column in table-compat mode (sign-flipped power sum)");

  // curves
  auto* curves = app.add_subcommand("curves", "Modified-lens capacitance with its approximations");
  ModelFlags curve_flags;
  curve_flags.add_to(curves, false);
  double curve_min_nm = 30.0, curve_max_um = 10.0;
  int curve_samples = 400;
  curves->add_option("--d-min-nm", curve_min_nm, "Range start, nm")->capture_default_str();
  curves->add_option("--d-max-um", curve_max_um, "Range end, um")->capture_default_str();
  curves->add_option("--samples", curve_samples, "Samples (log-spaced)")->capture_default_str();

  // fit
  auto* fit = app.add_subcommand("fit", "Weighted least-squares fit of a dataset CSV");
  ModelFlags fit_flags;
  fit_flags.add_to(fit, false);
  std::string data_path, family_name = "exact-parasitic", report_path;
  double beta_nm_per_v = 87.0;
  std::optional<double> v0_fixed, v0_min, v0_max;
  fit->add_option("--data", data_path, "Dataset CSV path")->required();
  fit->add_option("--family", family_name,
                  "exact-parasitic|pfa-parasitic|modified-lens|ideal-log|power-law")
      ->check(CLI::IsMember(
          {"exact-parasitic", "pfa-parasitic", "modified-lens", "ideal-log", "power-law"}));
  fit->add_option("--beta-nm-per-v", beta_nm_per_v, "Piezo calibration, nm/V")
      ->capture_default_str();
  fit->add_option("--v0", v0_fixed, "Fix the contact voltage V0_PZT, V");
  fit->add_option("--v0-min", v0_min, "Profile bracket lower edge, V");
  fit->add_option("--v0-max", v0_max, "Profile bracket upper edge, V");
  fit->add_option("--report", report_path, "Write the JSON fit report here");

  // synth
  auto* synth = app.add_subcommand("synth", "Deterministic synthetic dataset CSV");
  ModelFlags synth_flags;
  synth_flags.add_to(synth);
  std::string synth_kind = "separation", synth_out;
  double synth_d_min_nm = 500.5, synth_d_max_nm = 4000.2;
  double synth_v_min = 0.0, synth_v_max = 68.76;
  int synth_n = 351;
  double synth_sigma_pf = 2e-4, synth_v0 = 69.93, synth_beta = 87.0;
  std::uint64_t synth_seed = 42;
  synth->add_option("--kind", synth_kind, "Design abscissa: separation|piezo")
      ->check(CLI::IsMember({"separation", "piezo"}))
      ->capture_default_str();
  synth->add_option("--d-min-nm", synth_d_min_nm, "Design start, nm")->capture_default_str();
  synth->add_option("--d-max-nm", synth_d_max_nm, "Design end, nm")->capture_default_str();
  synth->add_option("--v-min", synth_v_min, "Piezo design start, V")->capture_default_str();
  synth->add_option("--v-max", synth_v_max, "Piezo design end, V")->capture_default_str();
  synth->add_option("--n", synth_n, "Number of points")->capture_default_str();
  synth->add_option("--sigma-pF", synth_sigma_pf, "Noise and uncertainty, pF")
      ->capture_default_str();
  synth->add_option("--beta-nm-per-v", synth_beta, "Piezo calibration, nm/V")
      ->capture_default_str();
  synth->add_option("--v0", synth_v0, "Contact voltage for piezo designs, V")
      ->capture_default_str();
  synth->add_option("--seed", synth_seed, "Noise seed")->capture_default_str();
  bool synth_noise_free = false;
  synth->add_flag("--noise-free", synth_noise_free,
                  "Emit the exact model curve with the given uncertainty column");
  synth->add_option("--out", synth_out, "Output CSV path (sidecar: <out>.synth.json)")
      ->required();

  // exponent
  auto* exponent = app.add_subcommand("exponent", "Effective force-gradient exponent");
  ModelFlags exp_flags;
  exp_flags.model = "modified";
  exp_flags.add_to(exponent);
  double exp_min_nm = 30.0, exp_max_nm = 100.0;
  int exp_points = 50;
  exponent->add_option("--d-min-nm", exp_min_nm, "Range start, nm")->capture_default_str();
  exponent->add_option("--d-max-nm", exp_max_nm, "Range end, nm")->capture_default_str();
  exponent->add_option("--points", exp_points, "Log-spaced sample count")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // flag errors are exit 2; --help/--version stay 0
  }

  try {
    if (*eval)
      return run_eval(eval_flags, d_um, d_nm, d_min_um, d_max_um, samples, log_grid, format,
                      output);
    if (*table) return run_table(table_r_um, table_d_um, table_theta, table_compat, format, output);
    if (*curves) return run_curves(curve_flags, curve_min_nm, curve_max_um, curve_samples, output);
    if (*fit)
      return run_fit(fit_flags, data_path, family_name, beta_nm_per_v, v0_fixed, v0_min, v0_max,
                     report_path, format);
    if (*synth)
      return run_synth(synth_flags, synth_kind, synth_d_min_nm, synth_d_max_nm, synth_v_min,
                       synth_v_max, synth_n, synth_sigma_pf, synth_beta, synth_v0, synth_seed,
                       synth_noise_free, synth_out);
    if (*exponent)
      return run_exponent(exp_flags, exp_min_nm, exp_max_nm, exp_points, format, output);
  } catch (const std::exception& e) {
    std::cerr << "capcal: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
