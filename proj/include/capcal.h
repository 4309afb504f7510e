/* capcal — sphere-plane / lens-plane electrostatic models and capacitance
 * calibration fits, exposed as a C shared-library API.
 *
 * Conventions: all lengths in meters, capacitances in farads, voltages in
 * volts. Normalized forces are -F/(V-V0)^2 in F/m, positive for attraction.
 * Functions return CAPCAL_OK on success; on failure they return a status
 * code and leave outputs untouched. capcal_last_error() returns a
 * thread-local message for the most recent failure on the calling thread.
 */
#ifndef CAPCAL_H
#define CAPCAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CAPCAL_API __declspec(dllexport)
#else
#define CAPCAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum capcal_status {
  CAPCAL_OK = 0,
  CAPCAL_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad enum, bad size */
  CAPCAL_ERR_DOMAIN = 2,           /* input outside a model's domain */
  CAPCAL_ERR_CONVERGENCE = 3,      /* series hit the term cap */
  CAPCAL_ERR_SINGULAR = 4,         /* rank-deficient fit design */
  CAPCAL_ERR_EMPTY_OBJECTIVE = 5,  /* every fit point excluded */
  CAPCAL_ERR_IO = 6,               /* file could not be read/written */
  CAPCAL_ERR_FORMAT = 7,           /* malformed dataset CSV */
  CAPCAL_ERR_INTERNAL = 8
} capcal_status;

CAPCAL_API const char* capcal_version(void);
CAPCAL_API const char* capcal_last_error(void);

/* ---- direct model evaluation ------------------------------------------ */

typedef struct capcal_lens_geometry {
  double r_m;       /* nominal radius */
  double r1_m;      /* outer-sector radius, >= r_m */
  double r2_m;      /* inner-sector radius, <= r_m */
  double h_small_m; /* inner-sector height */
  double h_large_m; /* outer-sector height, >= h_small_m */
} capcal_lens_geometry;

CAPCAL_API capcal_status capcal_alpha_parameter(double d_m, double radius_m, double* out);
CAPCAL_API capcal_status capcal_exact_capacitance(double d_m, double radius_m, double* out_f);
/* Variant reporting series diagnostics; terms/tail may be NULL. */
CAPCAL_API capcal_status capcal_exact_capacitance_ex(double d_m, double radius_m, double* out_f,
                                                     size_t* terms_used, double* tail_bound);
CAPCAL_API capcal_status capcal_exact_force_norm(double d_m, double radius_m, double* out_f_per_m);
CAPCAL_API capcal_status capcal_exact_force(double d_m, double radius_m, double v, double v0,
                                            double* out_n);
CAPCAL_API capcal_status capcal_electrostatic_energy(double d_m, double radius_m, double v,
                                                     double v0, double* out_j);
CAPCAL_API capcal_status capcal_smallsep_capacitance(double d_m, double radius_m, double theta,
                                                     double* out_f);
CAPCAL_API capcal_status capcal_pfa_capacitance(double d_m, double radius_m, double* out_f);
CAPCAL_API capcal_status capcal_pfa_force_norm(double d_m, double radius_m, double* out_f_per_m);
CAPCAL_API capcal_status capcal_expansion_force_norm(double d_m, double radius_m,
                                                     double* out_f_per_m);
CAPCAL_API capcal_status capcal_expansion_capacitance(double d_m, double radius_m, double theta,
                                                      int table_compat, double* out_f);
CAPCAL_API capcal_status capcal_modified_force_norm(double d_m, capcal_lens_geometry geom,
                                                    double* out_f_per_m);
CAPCAL_API capcal_status capcal_modified_capacitance(double d_m, capcal_lens_geometry geom,
                                                     double c_tilde_f, double* out_f);
CAPCAL_API capcal_status capcal_modified_capacitance_small(double d_m, capcal_lens_geometry geom,
                                                           double* out_f);
CAPCAL_API capcal_status capcal_modified_capacitance_large(double d_m, capcal_lens_geometry geom,
                                                           double c_tilde_f, double* out_f);
CAPCAL_API capcal_status capcal_parasitic_capacitance(double d_m, double a1_f, double a2_f_per_m,
                                                      double* out_f);

/* ---- model handles ----------------------------------------------------- */

typedef struct capcal_model capcal_model;

CAPCAL_API capcal_status capcal_model_create_exact_sphere(double radius_m, capcal_model** out);
CAPCAL_API capcal_status capcal_model_create_pfa(double radius_m, capcal_model** out);
CAPCAL_API capcal_status capcal_model_create_smallsep(double radius_m, double theta,
                                                      capcal_model** out);
CAPCAL_API capcal_status capcal_model_create_expansion(double radius_m, double theta,
                                                       int table_compat, capcal_model** out);
CAPCAL_API capcal_status capcal_model_create_modified_lens(capcal_lens_geometry geom,
                                                           double c_tilde_f, capcal_model** out);
CAPCAL_API capcal_status capcal_model_create_power_law(double a1_f, double a3_f_per_m03,
                                                       capcal_model** out);
CAPCAL_API capcal_status capcal_model_create_ideal_log(double a1_f, double a3_f, double radius_m,
                                                       capcal_model** out);
/* Adds C^p(d) = a1 - a2 d on top of the model's own capacitance. */
CAPCAL_API capcal_status capcal_model_set_parasitic(capcal_model* model, double a1_f,
                                                    double a2_f_per_m);
CAPCAL_API void capcal_model_free(capcal_model* model);

CAPCAL_API capcal_status capcal_model_capacitance(const capcal_model* model, double d_m,
                                                  double* out_f);
CAPCAL_API capcal_status capcal_model_force_norm(const capcal_model* model, double d_m,
                                                 double* out_f_per_m);
CAPCAL_API capcal_status capcal_model_force_gradient(const capcal_model* model, double d_m,
                                                     double* out_f_per_m2);
/* Writes a validity note ("" when d is inside the certified window). */
CAPCAL_API capcal_status capcal_model_validity_note(const capcal_model* model, double d_m,
                                                    char* buf, size_t buflen);
CAPCAL_API capcal_status capcal_effective_exponent(const capcal_model* model, double d_lo_m,
                                                   double d_hi_m, int n_points, double* out);

/* ---- statistics kernels ------------------------------------------------ */

CAPCAL_API capcal_status capcal_regularized_gamma_q(double a, double x, double* out);
CAPCAL_API capcal_status capcal_chi2_p_value(double chi2, uint64_t dof, double* out);
CAPCAL_API capcal_status capcal_piezo_to_separation(double v_pzt, double beta_m_per_v,
                                                    double v0_pzt, double* out_m);
CAPCAL_API capcal_status capcal_refit_power_law_constants(capcal_lens_geometry geom, double d_lo_m,
                                                          double d_hi_m, double* out_a1_f,
                                                          double* out_a3_f);

/* ---- datasets ----------------------------------------------------------- */

typedef struct capcal_dataset capcal_dataset;

typedef enum capcal_abscissa_kind {
  CAPCAL_KIND_PIEZO_VOLTS = 0,
  CAPCAL_KIND_SEPARATION = 1
} capcal_abscissa_kind;

/* x in volts (piezo) or meters (separation); capacitances/sigmas in farads. */
CAPCAL_API capcal_status capcal_dataset_create(capcal_abscissa_kind kind, const double* x,
                                               const double* cap_f, const double* sigma_f,
                                               size_t n, capcal_dataset** out);
CAPCAL_API capcal_status capcal_dataset_load_csv(const char* path, capcal_dataset** out);
CAPCAL_API capcal_status capcal_dataset_save_csv(const capcal_dataset* ds, const char* path);
CAPCAL_API size_t capcal_dataset_size(const capcal_dataset* ds);
CAPCAL_API capcal_abscissa_kind capcal_dataset_kind(const capcal_dataset* ds);
CAPCAL_API capcal_status capcal_dataset_point(const capcal_dataset* ds, size_t index, double* x,
                                              double* cap_f, double* sigma_f);
CAPCAL_API void capcal_dataset_free(capcal_dataset* ds);

/* Truth model + Gaussian noise from a counter-based deterministic generator
 * (capcal_synth_generator()). sigma_f has n_sigma entries, n_sigma == 1 for a
 * homoscedastic design or n_sigma == n. beta/v0 are used only for piezo
 * designs. */
CAPCAL_API capcal_status capcal_synthesize(const capcal_model* truth, capcal_abscissa_kind kind,
                                           const double* abscissae, size_t n,
                                           const double* sigma_f, size_t n_sigma,
                                           double beta_m_per_v, double v0_pzt, uint64_t seed,
                                           capcal_dataset** out);
CAPCAL_API const char* capcal_synth_generator(void);

/* ---- fits --------------------------------------------------------------- */

typedef struct capcal_fit capcal_fit;

typedef enum capcal_family_kind {
  CAPCAL_FAMILY_EXACT_PARASITIC = 0, /* fits parasitic a1, a2 over the exact sphere */
  CAPCAL_FAMILY_PFA_PARASITIC = 1,   /* fits parasitic a1, a2 over the PFA log term */
  CAPCAL_FAMILY_MODIFIED_LENS = 2,   /* fits the integration constant c_tilde */
  CAPCAL_FAMILY_IDEAL_LOG = 3,       /* fits a1, a3 of a1 + a3 ln(R/d) */
  CAPCAL_FAMILY_POWER_LAW = 4        /* fits a1, a3 of a1 + a3 d^0.3 */
} capcal_family_kind;

typedef struct capcal_family_spec {
  capcal_family_kind kind;
  double radius_m;           /* exact / pfa / ideal-log families */
  capcal_lens_geometry lens; /* modified-lens family */
} capcal_family_spec;

/* chi^2 of a model against a dataset; out_excluded may be NULL. For piezo
 * datasets pass has_calib = 1 with beta/v0. */
CAPCAL_API capcal_status capcal_chi_squared(const capcal_dataset* ds, const capcal_model* model,
                                            int has_calib, double beta_m_per_v, double v0_pzt,
                                            double* out_chi2, size_t* out_excluded);

/* Exact linear solve. For piezo datasets pass has_calib = 1 with a fixed
 * contact voltage. */
CAPCAL_API capcal_status capcal_fit_linear(const capcal_dataset* ds,
                                           const capcal_family_spec* family, int has_calib,
                                           double beta_m_per_v, double v0_pzt, capcal_fit** out);

/* Profiles chi^2 over V0_PZT in [v0_lo, v0_hi] (piezo datasets only). A
 * boundary-pinned minimum yields a fit with capcal_fit_converged() == 0, not
 * an error. */
CAPCAL_API capcal_status capcal_fit_contact_voltage(const capcal_dataset* ds,
                                                    const capcal_family_spec* family,
                                                    double beta_m_per_v, double v0_lo,
                                                    double v0_hi, capcal_fit** out);

CAPCAL_API size_t capcal_fit_param_count(const capcal_fit* fit);
CAPCAL_API capcal_status capcal_fit_param(const capcal_fit* fit, size_t index, char* name_buf,
                                          size_t name_len, double* value, double* sigma,
                                          char* unit_buf, size_t unit_len);
CAPCAL_API double capcal_fit_chi2(const capcal_fit* fit);
CAPCAL_API uint64_t capcal_fit_dof(const capcal_fit* fit);
CAPCAL_API double capcal_fit_reduced_chi2(const capcal_fit* fit);
CAPCAL_API double capcal_fit_p_value(const capcal_fit* fit);
CAPCAL_API size_t capcal_fit_excluded(const capcal_fit* fit);
CAPCAL_API int capcal_fit_converged(const capcal_fit* fit);

/* Reports; strings are heap-allocated, release with capcal_string_free. */
CAPCAL_API capcal_status capcal_fit_report_json(const capcal_fit* fit, char** out);
CAPCAL_API capcal_status capcal_fit_report_text(const capcal_fit* fit, char** out);
CAPCAL_API void capcal_string_free(char* s);
CAPCAL_API void capcal_fit_free(capcal_fit* fit);

#ifdef __cplusplus
}
#endif

#endif /* CAPCAL_H */
