#include "capcal.h"

#include <algorithm>
#include <cstring>
#include <string>
#include <utility>

#include "capcal/calibration.hpp"
#include "capcal/constants.hpp"
#include "capcal/errors.hpp"
#include "capcal/model_spec.hpp"
#include "capcal/models.hpp"
#include "capcal/numerics.hpp"
#include "capcal/report.hpp"

struct capcal_model {
  capcal::models::CapacitanceModelSpec spec;
};

struct capcal_dataset {
  capcal::calib::Dataset ds;
};

struct capcal_fit {
  capcal::calib::FitResult fit;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* msg) { g_last_error = msg ? msg : ""; }

template <typename F>
capcal_status wrap(F&& body) noexcept {
  try {
    body();
    return CAPCAL_OK;
  } catch (const capcal::domain_error& e) {
    set_error(e.what());
    return CAPCAL_ERR_DOMAIN;
  } catch (const capcal::convergence_error& e) {
    set_error(e.what());
    return CAPCAL_ERR_CONVERGENCE;
  } catch (const capcal::singular_error& e) {
    set_error(e.what());
    return CAPCAL_ERR_SINGULAR;
  } catch (const capcal::empty_objective_error& e) {
    set_error(e.what());
    return CAPCAL_ERR_EMPTY_OBJECTIVE;
  } catch (const capcal::format_error& e) {
    set_error(e.what());
    return CAPCAL_ERR_FORMAT;
  } catch (const capcal::io_error& e) {
    set_error(e.what());
    return CAPCAL_ERR_IO;
  } catch (const capcal::error& e) {
    // contract violations (missing calibration, not enough points, ...)
    set_error(e.what());
    return CAPCAL_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return CAPCAL_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return CAPCAL_ERR_INTERNAL;
  }
}

capcal_status invalid(const char* msg) {
  set_error(msg);
  return CAPCAL_ERR_INVALID_ARGUMENT;
}

capcal::ModifiedLensGeometry to_lens(const capcal_lens_geometry& g) {
  return capcal::ModifiedLensGeometry(g.r_m, g.r1_m, g.r2_m, g.h_small_m, g.h_large_m);
}

capcal::calib::FitFamily to_family(const capcal_family_spec& spec) {
  using namespace capcal::calib;
  switch (spec.kind) {
    case CAPCAL_FAMILY_EXACT_PARASITIC:
      return ExactParasiticFamily{capcal::SphereGeometry(spec.radius_m)};
    case CAPCAL_FAMILY_PFA_PARASITIC:
      return PfaParasiticFamily{capcal::SphereGeometry(spec.radius_m)};
    case CAPCAL_FAMILY_MODIFIED_LENS:
      return ModifiedLensFamily{to_lens(spec.lens)};
    case CAPCAL_FAMILY_IDEAL_LOG:
      return IdealLogFamily{capcal::SphereGeometry(spec.radius_m)};
    case CAPCAL_FAMILY_POWER_LAW:
      return PowerLawFamily{};
  }
  throw capcal::error("unknown fit family");
}

void copy_to_buffer(const std::string& s, char* buf, size_t buflen) {
  if (!buf || buflen == 0) return;
  size_t n = std::min(s.size(), buflen - 1);
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

capcal_status make_model(capcal_model** out, capcal::models::CapacitanceModelSpec spec) {
  *out = new capcal_model{std::move(spec)};
  return CAPCAL_OK;
}

}  // namespace

extern "C" {

const char* capcal_version(void) { return "0.1.0"; }

const char* capcal_last_error(void) { return g_last_error.c_str(); }

/* ---- direct evaluation -------------------------------------------------- */

#define CAPCAL_REQUIRE_OUT(ptr) \
  if (!(ptr)) return invalid("output pointer is null")

capcal_status capcal_alpha_parameter(double d_m, double radius_m, double* out) {
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    *out = capcal::models::alpha_parameter(d_m, capcal::SphereGeometry(radius_m));
  });
}

capcal_status capcal_exact_capacitance(double d_m, double radius_m, double* out_f) {
  CAPCAL_REQUIRE_OUT(out_f);
  return wrap([&] {
    *out_f = capcal::models::exact_capacitance(d_m, capcal::SphereGeometry(radius_m));
  });
}

capcal_status capcal_exact_capacitance_ex(double d_m, double radius_m, double* out_f,
                                          size_t* terms_used, double* tail_bound) {
  CAPCAL_REQUIRE_OUT(out_f);
  return wrap([&] {
    auto series =
        capcal::models::exact_capacitance_series(d_m, capcal::SphereGeometry(radius_m));
    *out_f = series.value;
    if (terms_used) *terms_used = series.terms_used;
    if (tail_bound) *tail_bound = series.tail_bound;
  });
}

capcal_status capcal_exact_force_norm(double d_m, double radius_m, double* out_f_per_m) {
  CAPCAL_REQUIRE_OUT(out_f_per_m);
  return wrap([&] {
    *out_f_per_m = capcal::models::exact_force_norm(d_m, capcal::SphereGeometry(radius_m));
  });
}

capcal_status capcal_exact_force(double d_m, double radius_m, double v, double v0, double* out_n) {
  CAPCAL_REQUIRE_OUT(out_n);
  return wrap([&] {
    *out_n = capcal::models::exact_force(d_m, capcal::SphereGeometry(radius_m),
                                         capcal::VoltageConfig{v, v0});
  });
}

capcal_status capcal_electrostatic_energy(double d_m, double radius_m, double v, double v0,
                                          double* out_j) {
  CAPCAL_REQUIRE_OUT(out_j);
  return wrap([&] {
    *out_j = capcal::models::electrostatic_energy(d_m, capcal::SphereGeometry(radius_m),
                                                  capcal::VoltageConfig{v, v0});
  });
}

capcal_status capcal_smallsep_capacitance(double d_m, double radius_m, double theta,
                                          double* out_f) {
  CAPCAL_REQUIRE_OUT(out_f);
  return wrap([&] {
    *out_f = capcal::models::smallsep_capacitance(d_m, capcal::SphereGeometry(radius_m),
                                                  capcal::ThetaParameter(theta));
  });
}

capcal_status capcal_pfa_capacitance(double d_m, double radius_m, double* out_f) {
  CAPCAL_REQUIRE_OUT(out_f);
  return wrap([&] {
    *out_f = capcal::models::pfa_capacitance(d_m, capcal::SphereGeometry(radius_m));
  });
}

capcal_status capcal_pfa_force_norm(double d_m, double radius_m, double* out_f_per_m) {
  CAPCAL_REQUIRE_OUT(out_f_per_m);
  return wrap([&] {
    *out_f_per_m = capcal::models::pfa_force_norm(d_m, capcal::SphereGeometry(radius_m));
  });
}

capcal_status capcal_expansion_force_norm(double d_m, double radius_m, double* out_f_per_m) {
  CAPCAL_REQUIRE_OUT(out_f_per_m);
  return wrap([&] {
    *out_f_per_m = capcal::models::expansion_force_norm(d_m, capcal::SphereGeometry(radius_m));
  });
}

capcal_status capcal_expansion_capacitance(double d_m, double radius_m, double theta,
                                           int table_compat, double* out_f) {
  CAPCAL_REQUIRE_OUT(out_f);
  return wrap([&] {
    *out_f = capcal::models::expansion_capacitance(d_m, capcal::SphereGeometry(radius_m),
                                                   capcal::ThetaParameter(theta),
                                                   table_compat != 0);
  });
}

capcal_status capcal_modified_force_norm(double d_m, capcal_lens_geometry geom,
                                         double* out_f_per_m) {
  CAPCAL_REQUIRE_OUT(out_f_per_m);
  return wrap([&] { *out_f_per_m = capcal::models::modified_force_norm(d_m, to_lens(geom)); });
}

capcal_status capcal_modified_capacitance(double d_m, capcal_lens_geometry geom, double c_tilde_f,
                                          double* out_f) {
  CAPCAL_REQUIRE_OUT(out_f);
  return wrap(
      [&] { *out_f = capcal::models::modified_capacitance(d_m, to_lens(geom), c_tilde_f); });
}

capcal_status capcal_modified_capacitance_small(double d_m, capcal_lens_geometry geom,
                                                double* out_f) {
  CAPCAL_REQUIRE_OUT(out_f);
  return wrap([&] { *out_f = capcal::models::modified_capacitance_small(d_m, to_lens(geom)); });
}

capcal_status capcal_modified_capacitance_large(double d_m, capcal_lens_geometry geom,
                                                double c_tilde_f, double* out_f) {
  CAPCAL_REQUIRE_OUT(out_f);
  return wrap([&] {
    *out_f = capcal::models::modified_capacitance_large(d_m, to_lens(geom), c_tilde_f);
  });
}

capcal_status capcal_parasitic_capacitance(double d_m, double a1_f, double a2_f_per_m,
                                           double* out_f) {
  CAPCAL_REQUIRE_OUT(out_f);
  return wrap([&] {
    *out_f =
        capcal::models::parasitic_capacitance(d_m, capcal::ParasiticParams(a1_f, a2_f_per_m));
  });
}

/* ---- model handles ------------------------------------------------------ */

capcal_status capcal_model_create_exact_sphere(double radius_m, capcal_model** out) {
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    make_model(out, capcal::models::CapacitanceModelSpec::exact_sphere(
                        capcal::SphereGeometry(radius_m)));
  });
}

capcal_status capcal_model_create_pfa(double radius_m, capcal_model** out) {
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    make_model(out,
               capcal::models::CapacitanceModelSpec::pfa_leading(capcal::SphereGeometry(radius_m)));
  });
}

capcal_status capcal_model_create_smallsep(double radius_m, double theta, capcal_model** out) {
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    make_model(out, capcal::models::CapacitanceModelSpec::smallsep_log(
                        capcal::SphereGeometry(radius_m), capcal::ThetaParameter(theta)));
  });
}

capcal_status capcal_model_create_expansion(double radius_m, double theta, int table_compat,
                                            capcal_model** out) {
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    make_model(out, capcal::models::CapacitanceModelSpec::expansion(
                        capcal::SphereGeometry(radius_m), capcal::ThetaParameter(theta),
                        table_compat != 0));
  });
}

capcal_status capcal_model_create_modified_lens(capcal_lens_geometry geom, double c_tilde_f,
                                                capcal_model** out) {
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    make_model(out, capcal::models::CapacitanceModelSpec::modified_lens(to_lens(geom), c_tilde_f));
  });
}

capcal_status capcal_model_create_power_law(double a1_f, double a3_f_per_m03, capcal_model** out) {
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    make_model(out, capcal::models::CapacitanceModelSpec::power_law(a1_f, a3_f_per_m03));
  });
}

capcal_status capcal_model_create_ideal_log(double a1_f, double a3_f, double radius_m,
                                            capcal_model** out) {
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    make_model(out, capcal::models::CapacitanceModelSpec::ideal_log(
                        a1_f, a3_f, capcal::SphereGeometry(radius_m)));
  });
}

capcal_status capcal_model_set_parasitic(capcal_model* model, double a1_f, double a2_f_per_m) {
  if (!model) return invalid("model is null");
  return wrap([&] {
    model->spec = model->spec.with_parasitic(capcal::ParasiticParams(a1_f, a2_f_per_m));
  });
}

void capcal_model_free(capcal_model* model) { delete model; }

capcal_status capcal_model_capacitance(const capcal_model* model, double d_m, double* out_f) {
  if (!model) return invalid("model is null");
  CAPCAL_REQUIRE_OUT(out_f);
  return wrap([&] { *out_f = capcal::models::evaluate_model(model->spec, d_m); });
}

capcal_status capcal_model_force_norm(const capcal_model* model, double d_m,
                                      double* out_f_per_m) {
  if (!model) return invalid("model is null");
  CAPCAL_REQUIRE_OUT(out_f_per_m);
  return wrap([&] { *out_f_per_m = capcal::models::model_force_norm(model->spec, d_m); });
}

capcal_status capcal_model_force_gradient(const capcal_model* model, double d_m,
                                          double* out_f_per_m2) {
  if (!model) return invalid("model is null");
  CAPCAL_REQUIRE_OUT(out_f_per_m2);
  return wrap([&] { *out_f_per_m2 = capcal::models::model_force_gradient(model->spec, d_m); });
}

capcal_status capcal_model_validity_note(const capcal_model* model, double d_m, char* buf,
                                         size_t buflen) {
  if (!model) return invalid("model is null");
  if (!buf || buflen == 0) return invalid("buffer is null or empty");
  return wrap([&] { copy_to_buffer(capcal::models::validity_warning(model->spec, d_m), buf, buflen); });
}

capcal_status capcal_effective_exponent(const capcal_model* model, double d_lo_m, double d_hi_m,
                                        int n_points, double* out) {
  if (!model) return invalid("model is null");
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    *out = capcal::models::effective_exponent(model->spec, d_lo_m, d_hi_m, n_points);
  });
}

/* ---- statistics kernels -------------------------------------------------- */

capcal_status capcal_regularized_gamma_q(double a, double x, double* out) {
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] { *out = capcal::num::regularized_gamma_q(a, x); });
}

capcal_status capcal_chi2_p_value(double chi2, uint64_t dof, double* out) {
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] { *out = capcal::num::chi2_p_value(chi2, static_cast<std::size_t>(dof)); });
}

capcal_status capcal_piezo_to_separation(double v_pzt, double beta_m_per_v, double v0_pzt,
                                         double* out_m) {
  CAPCAL_REQUIRE_OUT(out_m);
  return wrap([&] {
    *out_m = capcal::calib::piezo_to_separation(
        v_pzt, capcal::calib::PiezoCalibration(beta_m_per_v, v0_pzt));
  });
}

capcal_status capcal_refit_power_law_constants(capcal_lens_geometry geom, double d_lo_m,
                                               double d_hi_m, double* out_a1_f,
                                               double* out_a3_f) {
  CAPCAL_REQUIRE_OUT(out_a1_f);
  CAPCAL_REQUIRE_OUT(out_a3_f);
  return wrap([&] {
    auto [a1, a3] = capcal::calib::refit_power_law_constants(to_lens(geom), d_lo_m, d_hi_m);
    *out_a1_f = a1;
    *out_a3_f = a3;
  });
}

/* ---- datasets ------------------------------------------------------------ */

capcal_status capcal_dataset_create(capcal_abscissa_kind kind, const double* x,
                                    const double* cap_f, const double* sigma_f, size_t n,
                                    capcal_dataset** out) {
  CAPCAL_REQUIRE_OUT(out);
  if (!x || !cap_f || !sigma_f) return invalid("data pointers must not be null");
  if (n == 0) return invalid("dataset must have at least one point");
  if (kind != CAPCAL_KIND_PIEZO_VOLTS && kind != CAPCAL_KIND_SEPARATION)
    return invalid("unknown abscissa kind");
  return wrap([&] {
    capcal::calib::Dataset ds;
    ds.kind = kind == CAPCAL_KIND_PIEZO_VOLTS ? capcal::calib::AbscissaKind::PiezoVoltage
                                              : capcal::calib::AbscissaKind::Separation;
    ds.points.reserve(n);
    for (size_t i = 0; i < n; ++i)
      ds.points.push_back(capcal::calib::Measurement{x[i], cap_f[i], sigma_f[i]});
    *out = new capcal_dataset{std::move(ds)};
  });
}

capcal_status capcal_dataset_load_csv(const char* path, capcal_dataset** out) {
  CAPCAL_REQUIRE_OUT(out);
  if (!path) return invalid("path is null");
  return wrap([&] { *out = new capcal_dataset{capcal::calib::load_dataset_csv(path)}; });
}

capcal_status capcal_dataset_save_csv(const capcal_dataset* ds, const char* path) {
  if (!ds) return invalid("dataset is null");
  if (!path) return invalid("path is null");
  return wrap([&] { capcal::calib::save_dataset_csv(ds->ds, path); });
}

size_t capcal_dataset_size(const capcal_dataset* ds) { return ds ? ds->ds.points.size() : 0; }

capcal_abscissa_kind capcal_dataset_kind(const capcal_dataset* ds) {
  if (!ds) return CAPCAL_KIND_SEPARATION;
  return ds->ds.kind == capcal::calib::AbscissaKind::PiezoVoltage ? CAPCAL_KIND_PIEZO_VOLTS
                                                                  : CAPCAL_KIND_SEPARATION;
}

capcal_status capcal_dataset_point(const capcal_dataset* ds, size_t index, double* x,
                                   double* cap_f, double* sigma_f) {
  if (!ds) return invalid("dataset is null");
  if (index >= ds->ds.points.size()) return invalid("point index out of range");
  const auto& m = ds->ds.points[index];
  if (x) *x = m.x;
  if (cap_f) *cap_f = m.capacitance;
  if (sigma_f) *sigma_f = m.sigma;
  return CAPCAL_OK;
}

void capcal_dataset_free(capcal_dataset* ds) { delete ds; }

capcal_status capcal_synthesize(const capcal_model* truth, capcal_abscissa_kind kind,
                                const double* abscissae, size_t n, const double* sigma_f,
                                size_t n_sigma, double beta_m_per_v, double v0_pzt, uint64_t seed,
                                capcal_dataset** out) {
  CAPCAL_REQUIRE_OUT(out);
  if (!truth) return invalid("truth model is null");
  if (!abscissae || n == 0) return invalid("design must have at least one abscissa");
  if (!sigma_f || (n_sigma != 1 && n_sigma != n))
    return invalid("sigma must have one entry or one entry per point");
  return wrap([&] {
    capcal::calib::SynthSpec spec{truth->spec};
    spec.kind = kind == CAPCAL_KIND_PIEZO_VOLTS ? capcal::calib::AbscissaKind::PiezoVoltage
                                                : capcal::calib::AbscissaKind::Separation;
    spec.abscissae.assign(abscissae, abscissae + n);
    spec.sigma.assign(sigma_f, sigma_f + n_sigma);
    if (spec.kind == capcal::calib::AbscissaKind::PiezoVoltage)
      spec.calib = capcal::calib::PiezoCalibration(beta_m_per_v, v0_pzt);
    spec.seed = seed;
    *out = new capcal_dataset{capcal::calib::generate_synthetic(spec)};
  });
}

const char* capcal_synth_generator(void) {
  static const std::string name = capcal::calib::synth_generator_name();
  return name.c_str();
}

/* ---- fits ------------------------------------------------------------------ */

capcal_status capcal_chi_squared(const capcal_dataset* ds, const capcal_model* model,
                                 int has_calib, double beta_m_per_v, double v0_pzt,
                                 double* out_chi2, size_t* out_excluded) {
  if (!ds) return invalid("dataset is null");
  if (!model) return invalid("model is null");
  CAPCAL_REQUIRE_OUT(out_chi2);
  return wrap([&] {
    std::optional<capcal::calib::PiezoCalibration> calib;
    if (has_calib) calib = capcal::calib::PiezoCalibration(beta_m_per_v, v0_pzt);
    auto result = capcal::calib::chi_squared(ds->ds, model->spec, calib);
    *out_chi2 = result.chi2;
    if (out_excluded) *out_excluded = result.excluded;
  });
}

capcal_status capcal_fit_linear(const capcal_dataset* ds, const capcal_family_spec* family,
                                int has_calib, double beta_m_per_v, double v0_pzt,
                                capcal_fit** out) {
  if (!ds) return invalid("dataset is null");
  if (!family) return invalid("family is null");
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    std::optional<capcal::calib::PiezoCalibration> calib;
    if (has_calib) calib = capcal::calib::PiezoCalibration(beta_m_per_v, v0_pzt);
    *out = new capcal_fit{capcal::calib::fit_linear(ds->ds, to_family(*family), calib)};
  });
}

capcal_status capcal_fit_contact_voltage(const capcal_dataset* ds,
                                         const capcal_family_spec* family, double beta_m_per_v,
                                         double v0_lo, double v0_hi, capcal_fit** out) {
  if (!ds) return invalid("dataset is null");
  if (!family) return invalid("family is null");
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] {
    *out = new capcal_fit{capcal::calib::fit_with_contact_voltage(ds->ds, to_family(*family),
                                                                  beta_m_per_v, {v0_lo, v0_hi})};
  });
}

size_t capcal_fit_param_count(const capcal_fit* fit) { return fit ? fit->fit.params.size() : 0; }

capcal_status capcal_fit_param(const capcal_fit* fit, size_t index, char* name_buf,
                               size_t name_len, double* value, double* sigma, char* unit_buf,
                               size_t unit_len) {
  if (!fit) return invalid("fit is null");
  if (index >= fit->fit.params.size()) return invalid("parameter index out of range");
  const auto& p = fit->fit.params[index];
  if (name_buf) copy_to_buffer(p.name, name_buf, name_len);
  if (value) *value = p.value;
  if (sigma) *sigma = p.sigma;
  if (unit_buf) copy_to_buffer(p.unit, unit_buf, unit_len);
  return CAPCAL_OK;
}

double capcal_fit_chi2(const capcal_fit* fit) { return fit ? fit->fit.chi2 : 0.0; }

uint64_t capcal_fit_dof(const capcal_fit* fit) { return fit ? fit->fit.dof : 0; }

double capcal_fit_reduced_chi2(const capcal_fit* fit) { return fit ? fit->fit.reduced_chi2 : 0.0; }

double capcal_fit_p_value(const capcal_fit* fit) { return fit ? fit->fit.p_value : 0.0; }

size_t capcal_fit_excluded(const capcal_fit* fit) { return fit ? fit->fit.excluded_points : 0; }

int capcal_fit_converged(const capcal_fit* fit) { return fit && fit->fit.converged ? 1 : 0; }

capcal_status capcal_fit_report_json(const capcal_fit* fit, char** out) {
  if (!fit) return invalid("fit is null");
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] { *out = dup_string(capcal::calib::fit_report_json(fit->fit)); });
}

capcal_status capcal_fit_report_text(const capcal_fit* fit, char** out) {
  if (!fit) return invalid("fit is null");
  CAPCAL_REQUIRE_OUT(out);
  return wrap([&] { *out = dup_string(capcal::calib::fit_report_text(fit->fit)); });
}

void capcal_string_free(char* s) { delete[] s; }

void capcal_fit_free(capcal_fit* fit) { delete fit; }

}  // extern "C"
