#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "capcal.h"

namespace {

const capcal_lens_geometry paper_lens{0.0309, 0.0494, 30e-6, 8e-9, 250e-9};

struct ModelHandle {
  capcal_model* m = nullptr;
  ~ModelHandle() { capcal_model_free(m); }
};
struct DatasetHandle {
  capcal_dataset* d = nullptr;
  ~DatasetHandle() { capcal_dataset_free(d); }
};
struct FitHandle {
  capcal_fit* f = nullptr;
  ~FitHandle() { capcal_fit_free(f); }
};

}  // namespace

TEST_CASE("version and error strings") {
  CHECK(std::string(capcal_version()) == "0.1.0");
  CHECK(std::string(capcal_synth_generator()) == "splitmix64-boxmuller-v1");
}

TEST_CASE("direct evaluation through the C surface") {
  double v = 0.0;
  REQUIRE(capcal_alpha_parameter(0.5e-6, 151.3e-6, &v) == CAPCAL_OK);
  CHECK(v == doctest::Approx(0.08127575408).epsilon(1e-9));

  REQUIRE(capcal_exact_capacitance(0.5e-6, 151.3e-6, &v) == CAPCAL_OK);
  CHECK(v == doctest::Approx(0.06371e-12).epsilon(2e-4));

  size_t terms = 0;
  double tail = -1.0;
  REQUIRE(capcal_exact_capacitance_ex(0.5e-6, 151.3e-6, &v, &terms, &tail) == CAPCAL_OK);
  CHECK(terms > 10);
  CHECK(tail >= 0.0);

  REQUIRE(capcal_exact_force_norm(0.5e-6, 151.3e-6, &v) == CAPCAL_OK);
  CHECK(v == doctest::Approx(8350.23e-12).epsilon(2e-4));

  REQUIRE(capcal_pfa_capacitance(0.5e-6, 151.3e-6, &v) == CAPCAL_OK);
  CHECK(v == doctest::Approx(0.04808e-12).epsilon(2e-4));

  REQUIRE(capcal_expansion_capacitance(4.0e-6, 151.3e-6, 0.5, 1, &v) == CAPCAL_OK);
  CHECK(v == doctest::Approx(0.04572e-12).epsilon(2e-4));

  REQUIRE(capcal_modified_capacitance(87e-9 * 69.93, paper_lens, 197.69e-12, &v) == CAPCAL_OK);
  CHECK(v == doctest::Approx(214.20e-12).epsilon(1e-4));

  REQUIRE(capcal_parasitic_capacitance(1e-6, 72.32971e-12, 2.18e-10, &v) == CAPCAL_OK);
  CHECK(v == doctest::Approx(72.32949e-12).epsilon(1e-7));

  REQUIRE(capcal_piezo_to_separation(68.76, 87e-9, 68.43, &v) == CAPCAL_OK);
  CHECK(v == doctest::Approx(-28.71e-9).epsilon(1e-12));

  REQUIRE(capcal_regularized_gamma_q(1.0, 1.0, &v) == CAPCAL_OK);
  CHECK(std::abs(v - std::exp(-1.0)) < 1e-12);
  REQUIRE(capcal_chi2_p_value(0.7 * 349.0, 349, &v) == CAPCAL_OK);
  CHECK(v > 0.99);
}

TEST_CASE("status codes and last-error messages") {
  double v = 0.0;
  CHECK(capcal_exact_capacitance(-1e-9, 151.3e-6, &v) == CAPCAL_ERR_DOMAIN);
  std::string msg = capcal_last_error();
  CHECK(msg.find("separation d") != std::string::npos);
  CHECK(msg.find("-1e-09") != std::string::npos);

  CHECK(capcal_exact_capacitance(1e-6, 151.3e-6, nullptr) == CAPCAL_ERR_INVALID_ARGUMENT);
  CHECK(capcal_regularized_gamma_q(-1.0, 1.0, &v) == CAPCAL_ERR_DOMAIN);

  capcal_dataset* ds = nullptr;
  CHECK(capcal_dataset_load_csv("/nonexistent/file.csv", &ds) == CAPCAL_ERR_IO);
}

TEST_CASE("last-error messages are thread local") {
  double v = 0.0;
  CHECK(capcal_exact_capacitance(-1.0, 151.3e-6, &v) == CAPCAL_ERR_DOMAIN);
  std::string main_msg = capcal_last_error();
  std::string worker_msg;
  std::thread worker([&] {
    double w = 0.0;
    CHECK(capcal_regularized_gamma_q(-2.0, 1.0, &w) == CAPCAL_ERR_DOMAIN);
    worker_msg = capcal_last_error();
  });
  worker.join();
  CHECK(std::string(capcal_last_error()) == main_msg);  // untouched by the worker
  CHECK(worker_msg.find("gamma shape") != std::string::npos);
}

TEST_CASE("model handles with parasitic add-on") {
  ModelHandle h;
  REQUIRE(capcal_model_create_exact_sphere(151.3e-6, &h.m) == CAPCAL_OK);
  REQUIRE(capcal_model_set_parasitic(h.m, 72.32971e-12, 2.18e-10) == CAPCAL_OK);
  double total = 0.0, bare = 0.0;
  ModelHandle plain;
  REQUIRE(capcal_model_create_exact_sphere(151.3e-6, &plain.m) == CAPCAL_OK);
  REQUIRE(capcal_model_capacitance(h.m, 1e-6, &total) == CAPCAL_OK);
  REQUIRE(capcal_model_capacitance(plain.m, 1e-6, &bare) == CAPCAL_OK);
  CHECK(total - bare == doctest::Approx(72.32949e-12).epsilon(1e-7));

  double fn = 0.0;
  REQUIRE(capcal_model_force_norm(h.m, 1e-6, &fn) == CAPCAL_OK);
  CHECK(fn == doctest::Approx(4148.06e-12 + 0.5 * 2.18e-10).epsilon(2e-4));

  double grad = 0.0;
  REQUIRE(capcal_model_force_gradient(h.m, 1e-6, &grad) == CAPCAL_OK);
  CHECK(grad < 0.0);
}

TEST_CASE("validity notes through the C surface") {
  ModelHandle h;
  REQUIRE(capcal_model_create_smallsep(151.3e-6, 0.5, &h.m) == CAPCAL_OK);
  char buf[256];
  REQUIRE(capcal_model_validity_note(h.m, 1e-6, buf, sizeof buf) == CAPCAL_OK);
  CHECK(buf[0] == '\0');
  REQUIRE(capcal_model_validity_note(h.m, 40e-6, buf, sizeof buf) == CAPCAL_OK);
  CHECK(std::strlen(buf) > 0);
}

TEST_CASE("effective exponent through the C surface") {
  ModelHandle pfa;
  REQUIRE(capcal_model_create_pfa(151.3e-6, &pfa.m) == CAPCAL_OK);
  double e = 0.0;
  REQUIRE(capcal_effective_exponent(pfa.m, 30e-9, 100e-9, 25, &e) == CAPCAL_OK);
  CHECK(e == doctest::Approx(2.0).epsilon(1e-6));

  ModelHandle lens;
  REQUIRE(capcal_model_create_modified_lens(paper_lens, 0.0, &lens.m) == CAPCAL_OK);
  REQUIRE(capcal_effective_exponent(lens.m, 30e-9, 100e-9, 50, &e) == CAPCAL_OK);
  CHECK(e > 1.6);
  CHECK(e < 1.8);
}

TEST_CASE("datasets and synthesis through the C surface") {
  ModelHandle truth;
  REQUIRE(capcal_model_create_exact_sphere(151.3e-6, &truth.m) == CAPCAL_OK);
  REQUIRE(capcal_model_set_parasitic(truth.m, 72.32971e-12, 2.18e-10) == CAPCAL_OK);

  std::vector<double> d(351);
  for (size_t i = 0; i < d.size(); ++i)
    d[i] = 500.5e-9 + (4000.2e-9 - 500.5e-9) * static_cast<double>(i) / 350.0;
  double sigma = 2e-16;

  DatasetHandle a, b;
  REQUIRE(capcal_synthesize(truth.m, CAPCAL_KIND_SEPARATION, d.data(), d.size(), &sigma, 1, 0.0,
                            0.0, 42, &a.d) == CAPCAL_OK);
  REQUIRE(capcal_synthesize(truth.m, CAPCAL_KIND_SEPARATION, d.data(), d.size(), &sigma, 1, 0.0,
                            0.0, 42, &b.d) == CAPCAL_OK);
  REQUIRE(capcal_dataset_size(a.d) == 351);
  CHECK(capcal_dataset_kind(a.d) == CAPCAL_KIND_SEPARATION);
  for (size_t i = 0; i < 351; i += 50) {
    double xa, ca, sa, xb, cb, sb;
    REQUIRE(capcal_dataset_point(a.d, i, &xa, &ca, &sa) == CAPCAL_OK);
    REQUIRE(capcal_dataset_point(b.d, i, &xb, &cb, &sb) == CAPCAL_OK);
    CHECK(ca == cb);  // same seed, bit identical
    CHECK(sa == sigma);
  }

  namespace fs = std::filesystem;
  fs::path file = fs::temp_directory_path() / "capcal_capi_ds.csv";
  REQUIRE(capcal_dataset_save_csv(a.d, file.c_str()) == CAPCAL_OK);
  DatasetHandle loaded;
  REQUIRE(capcal_dataset_load_csv(file.c_str(), &loaded.d) == CAPCAL_OK);
  CHECK(capcal_dataset_size(loaded.d) == 351);
  fs::remove(file);
}

TEST_CASE("linear fit and report through the C surface") {
  ModelHandle truth;
  REQUIRE(capcal_model_create_exact_sphere(151.3e-6, &truth.m) == CAPCAL_OK);
  REQUIRE(capcal_model_set_parasitic(truth.m, 72.32971e-12, 2.18e-10) == CAPCAL_OK);
  std::vector<double> d(351);
  for (size_t i = 0; i < d.size(); ++i)
    d[i] = 500.5e-9 + (4000.2e-9 - 500.5e-9) * static_cast<double>(i) / 350.0;
  double sigma = 2e-16;
  DatasetHandle ds;
  REQUIRE(capcal_synthesize(truth.m, CAPCAL_KIND_SEPARATION, d.data(), d.size(), &sigma, 1, 0.0,
                            0.0, 42, &ds.d) == CAPCAL_OK);

  capcal_family_spec family{};
  family.kind = CAPCAL_FAMILY_EXACT_PARASITIC;
  family.radius_m = 151.3e-6;
  FitHandle fit;
  REQUIRE(capcal_fit_linear(ds.d, &family, 0, 0.0, 0.0, &fit.f) == CAPCAL_OK);
  REQUIRE(capcal_fit_param_count(fit.f) == 2);

  char name[64], unit[64];
  double value = 0.0, psigma = 0.0;
  REQUIRE(capcal_fit_param(fit.f, 0, name, sizeof name, &value, &psigma, unit, sizeof unit) ==
          CAPCAL_OK);
  CHECK(std::string(name) == "A1_tilde");
  CHECK(std::string(unit) == "F");
  CHECK(std::abs(value - 72.32971e-12) < 4.0 * psigma);
  CHECK(capcal_fit_dof(fit.f) == 349);
  CHECK(capcal_fit_reduced_chi2(fit.f) > 0.78);
  CHECK(capcal_fit_reduced_chi2(fit.f) < 1.25);
  CHECK(capcal_fit_p_value(fit.f) > 0.05);
  CHECK(capcal_fit_excluded(fit.f) == 0);
  CHECK(capcal_fit_converged(fit.f) == 1);

  char* json = nullptr;
  REQUIRE(capcal_fit_report_json(fit.f, &json) == CAPCAL_OK);
  std::string text(json);
  capcal_string_free(json);
  CHECK(text.find("\"A1_tilde\"") != std::string::npos);
  CHECK(text.find("\"reduced_chi2\"") != std::string::npos);
  CHECK(text.find("\"versions\"") != std::string::npos);

  char* human = nullptr;
  REQUIRE(capcal_fit_report_text(fit.f, &human) == CAPCAL_OK);
  CHECK(std::string(human).find("A1_tilde") != std::string::npos);
  capcal_string_free(human);
}

TEST_CASE("contact-voltage fit through the C surface") {
  ModelHandle truth;
  REQUIRE(capcal_model_create_modified_lens(paper_lens, 197.69e-12, &truth.m) == CAPCAL_OK);
  std::vector<double> volts(121);
  for (size_t i = 0; i < volts.size(); ++i) volts[i] = 20.0 + 48.0 * static_cast<double>(i) / 120.0;
  double sigma = 0.0015e-12;
  DatasetHandle ds;
  REQUIRE(capcal_synthesize(truth.m, CAPCAL_KIND_PIEZO_VOLTS, volts.data(), volts.size(), &sigma,
                            1, 87e-9, 69.93, 7, &ds.d) == CAPCAL_OK);

  capcal_family_spec family{};
  family.kind = CAPCAL_FAMILY_MODIFIED_LENS;
  family.lens = paper_lens;
  FitHandle fit;
  REQUIRE(capcal_fit_contact_voltage(ds.d, &family, 87e-9, 68.5, 72.0, &fit.f) == CAPCAL_OK);
  CHECK(capcal_fit_converged(fit.f) == 1);
  REQUIRE(capcal_fit_param_count(fit.f) == 2);
  char name[64];
  double v0 = 0.0, sv0 = 0.0;
  REQUIRE(capcal_fit_param(fit.f, 1, name, sizeof name, &v0, &sv0, nullptr, 0) == CAPCAL_OK);
  CHECK(std::string(name) == "V0_PZT");
  CHECK(std::abs(v0 - 69.93) < 4.0 * sv0);

  double chi2 = 0.0;
  size_t excluded = 0;
  REQUIRE(capcal_chi_squared(ds.d, truth.m, 1, 87e-9, 69.93, &chi2, &excluded) == CAPCAL_OK);
  CHECK(excluded == 0);
  CHECK(chi2 / 121.0 > 0.5);
  CHECK(chi2 / 121.0 < 1.6);
}

TEST_CASE("refit of the lens power-law constants through the C surface") {
  double a1 = 0.0, a3 = 0.0;
  REQUIRE(capcal_refit_power_law_constants(paper_lens, 30e-9, 100e-9, &a1, &a3) == CAPCAL_OK);
  CHECK(a1 == doctest::Approx(33.2546e-12).epsilon(1e-3));
  CHECK(a3 == doctest::Approx(-384.663e-12).epsilon(1e-3));
}
