#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "capcal/calibration.hpp"
#include "capcal/constants.hpp"
#include "capcal/errors.hpp"
#include "capcal/report.hpp"

using namespace capcal;
using namespace capcal::calib;
using models::CapacitanceModelSpec;

namespace {

const SphereGeometry mto_sphere{151.3e-6};
const ModifiedLensGeometry paper_lens{0.0309, 0.0494, 30e-6, 8e-9, 250e-9};
constexpr double pf = units::f_per_pf;

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return xs;
}

// Truth of the MTO-style fit: exact sphere plus the reported parasitic term.
CapacitanceModelSpec mto_truth() {
  return CapacitanceModelSpec::exact_sphere(mto_sphere)
      .with_parasitic(ParasiticParams(72.32971e-12, 2.18e-4 * 1e-12 / 1e-6));
}

Dataset noiseless_dataset(const CapacitanceModelSpec& truth, const std::vector<double>& ds,
                          double sigma) {
  Dataset out;
  out.kind = AbscissaKind::Separation;
  for (double d : ds)
    out.points.push_back(Measurement{d, models::evaluate_model(truth, d), sigma});
  return out;
}

}  // namespace

TEST_CASE("piezo transform") {
  PiezoCalibration calib(87e-9, 68.43);
  CHECK(piezo_to_separation(68.43, calib) == 0.0);
  // reported pathology: separations past V0 are negative, not clamped
  CHECK(piezo_to_separation(68.76, calib) == doctest::Approx(-28.71e-9).epsilon(1e-12));
  PiezoCalibration modified(87e-9, 69.93);
  CHECK(piezo_to_separation(0.0, modified) == doctest::Approx(6083.91e-9).epsilon(1e-12));
  CHECK_THROWS_AS(PiezoCalibration(-1e-9, 0.0), domain_error);
}

TEST_CASE("chi squared basics") {
  auto constant = CapacitanceModelSpec::power_law(5e-12, 0.0);

  // model interpolates the data -> exactly zero
  Dataset interp = noiseless_dataset(constant, {1e-9, 2e-9, 3e-9}, 0.5e-12);
  CHECK(chi_squared(interp, constant).chi2 == 0.0);

  // one point, residual = sigma -> 1
  Dataset one;
  one.kind = AbscissaKind::Separation;
  one.points.push_back(Measurement{1e-6, 5e-12 + 2e-13, 2e-13});
  CHECK(chi_squared(one, constant).chi2 == doctest::Approx(1.0).epsilon(1e-14));

  // three hand-built points vs the constant model
  Dataset three;
  three.kind = AbscissaKind::Separation;
  three.points.push_back(Measurement{1e-9, 5.3e-12, 0.5e-12});  // r = 0.6
  three.points.push_back(Measurement{2e-9, 4.1e-12, 0.3e-12});  // r = -3
  three.points.push_back(Measurement{3e-9, 5.0e-12, 1.0e-12});  // r = 0
  CHECK(chi_squared(three, constant).chi2 == doctest::Approx(9.36).epsilon(1e-14));
}

TEST_CASE("chi squared is permutation invariant, bit for bit") {
  auto truth = mto_truth();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset ds;
  ds.kind = AbscissaKind::Separation;
  for (double d : linspace(500.5e-9, 4000.2e-9, 101))
    ds.points.push_back(
        Measurement{d, models::evaluate_model(truth, d) + 2e-16 * noise(rng), 2e-16});
  auto model = CapacitanceModelSpec::exact_sphere(mto_sphere)
                   .with_parasitic(ParasiticParams(72.32971e-12, 2.18e-10));
  double base = chi_squared(ds, model).chi2;
  Dataset shuffled = ds;
  std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
  CHECK(chi_squared(shuffled, model).chi2 == base);
}

TEST_CASE("chi squared sigma scaling") {
  auto truth = mto_truth();
  Dataset ds = noiseless_dataset(truth, linspace(600e-9, 3000e-9, 21), 2e-16);
  for (auto& p : ds.points) p.capacitance += 1e-16;  // constant offset residuals
  auto model = CapacitanceModelSpec::exact_sphere(mto_sphere)
                   .with_parasitic(ParasiticParams(72.32971e-12, 2.18e-10));
  double base = chi_squared(ds, model).chi2;
  Dataset scaled = ds;
  for (auto& p : scaled.points) p.sigma *= 2.0;
  CHECK(chi_squared(scaled, model).chi2 == doctest::Approx(base / 4.0).epsilon(1e-12));
}

TEST_CASE("chi squared excludes points the model cannot evaluate") {
  Dataset ds;
  ds.kind = AbscissaKind::PiezoVoltage;
  for (double v : {67.0, 68.0, 68.43, 68.9, 70.0})
    ds.points.push_back(Measurement{v, 27e-12, 1e-14});
  PiezoCalibration calib(87e-9, 68.43);

  // log-domain model: d <= 0 is out, i.e. every V_PZT >= V0
  auto lens = CapacitanceModelSpec::modified_lens(paper_lens, 0.0);
  auto r1 = chi_squared(ds, lens, calib);
  CHECK(r1.excluded == 3);
  CHECK(r1.included == 2);

  // power law survives d = 0 (defined limit), excludes only d < 0
  auto power = CapacitanceModelSpec::power_law(27e-12, -1e-12);
  auto r2 = chi_squared(ds, power, calib);
  CHECK(r2.excluded == 2);
  CHECK(r2.included == 3);

  // piezo dataset without a calibration is a contract violation
  CHECK_THROWS_AS(chi_squared(ds, lens), error);

  // everything excluded -> empty objective
  PiezoCalibration hopeless(87e-9, 60.0);
  CHECK_THROWS_AS(chi_squared(ds, lens, hopeless), empty_objective_error);
}

TEST_CASE("linear fit recovers noiseless truth exactly") {
  auto truth = mto_truth();
  Dataset ds = noiseless_dataset(truth, linspace(500.5e-9, 4000.2e-9, 51), 2e-4 * pf);
  FitResult fit = fit_linear(ds, ExactParasiticFamily{mto_sphere});
  REQUIRE(fit.params.size() == 2);
  CHECK(fit.params[0].name == "A1_tilde");
  CHECK(fit.params[0].value == doctest::Approx(72.32971e-12).epsilon(1e-10));
  CHECK(fit.params[1].value == doctest::Approx(2.18e-10).epsilon(1e-10));
  CHECK(fit.chi2 < 1e-12 * static_cast<double>(fit.dof));
  CHECK(fit.dof == 49);
  CHECK(fit.p_value > 0.999999);
  CHECK(fit.excluded_points == 0);
  CHECK(fit.converged);
}

TEST_CASE("linear fit is idempotent on its own predictions") {
  auto truth = mto_truth();
  SynthSpec spec(truth);
  spec.abscissae = linspace(500.5e-9, 4000.2e-9, 51);
  spec.sigma = {2e-4 * pf};
  spec.seed = 7;
  Dataset noisy = generate_synthetic(spec);
  FitResult first = fit_linear(noisy, ExactParasiticFamily{mto_sphere});

  Dataset predicted = noisy;
  for (auto& p : predicted.points)
    p.capacitance = models::evaluate_model(first.model, p.x);
  FitResult second = fit_linear(predicted, ExactParasiticFamily{mto_sphere});
  CHECK(second.params[0].value == doctest::Approx(first.params[0].value).epsilon(1e-12));
  CHECK(second.params[1].value == doctest::Approx(first.params[1].value).epsilon(1e-12));
  CHECK(second.chi2 < 1e-10);
}

TEST_CASE("linear fit under seeded noise stays within 4 sigma") {
  auto truth = mto_truth();
  SynthSpec spec(truth);
  spec.abscissae = linspace(500.5e-9, 4000.2e-9, 351);
  spec.sigma = {2e-4 * pf};
  spec.seed = 42;
  Dataset noisy = generate_synthetic(spec);
  FitResult fit = fit_linear(noisy, ExactParasiticFamily{mto_sphere});
  CHECK(std::abs(fit.params[0].value - 72.32971e-12) < 4.0 * fit.params[0].sigma);
  CHECK(std::abs(fit.params[1].value - 2.18e-10) < 4.0 * fit.params[1].sigma);
  CHECK(fit.reduced_chi2 > 0.78);
  CHECK(fit.reduced_chi2 < 1.25);
  // quoted precision scale of the reported parasitic constant
  CHECK(fit.params[0].sigma > 1e-5 * pf);
  CHECK(fit.params[0].sigma < 4e-5 * pf);
}

TEST_CASE("fit family parameter scaling under sigma") {
  auto truth = mto_truth();
  SynthSpec spec(truth);
  spec.abscissae = linspace(500.5e-9, 4000.2e-9, 51);
  spec.sigma = {2e-4 * pf};
  spec.seed = 11;
  Dataset noisy = generate_synthetic(spec);
  FitResult base = fit_linear(noisy, ExactParasiticFamily{mto_sphere});
  Dataset scaled = noisy;
  for (auto& p : scaled.points) p.sigma *= 3.0;
  FitResult alt = fit_linear(scaled, ExactParasiticFamily{mto_sphere});
  CHECK(alt.params[0].value == doctest::Approx(base.params[0].value).epsilon(1e-13));
  CHECK(alt.params[0].sigma == doctest::Approx(3.0 * base.params[0].sigma).epsilon(1e-12));
  CHECK(alt.chi2 == doctest::Approx(base.chi2 / 9.0).epsilon(1e-12));
}

TEST_CASE("linear fit error paths") {
  auto truth = mto_truth();
  Dataset ds = noiseless_dataset(truth, std::vector<double>(6, 1e-6), 2e-16);  // one abscissa
  CHECK_THROWS_AS(fit_linear(ds, ExactParasiticFamily{mto_sphere}), singular_error);

  Dataset piezo;
  piezo.kind = AbscissaKind::PiezoVoltage;
  piezo.points.push_back(Measurement{10.0, 27e-12, 1e-14});
  piezo.points.push_back(Measurement{20.0, 26e-12, 1e-14});
  piezo.points.push_back(Measurement{30.0, 25e-12, 1e-14});
  CHECK_THROWS_AS(fit_linear(piezo, ModifiedLensFamily{paper_lens}), error);
}

TEST_CASE("ideal-log and power-law families recover their own curves") {
  auto ideal_truth = CapacitanceModelSpec::ideal_log(199.3e-12, 1.757e-12, SphereGeometry(0.0309));
  Dataset ds1 = noiseless_dataset(ideal_truth, linspace(100e-9, 6e-6, 41), 1.5e-15);
  FitResult f1 = fit_linear(ds1, IdealLogFamily{SphereGeometry(0.0309)});
  CHECK(f1.params[0].value == doctest::Approx(199.3e-12).epsilon(1e-10));
  CHECK(f1.params[1].value == doctest::Approx(1.757e-12).epsilon(1e-10));

  auto power_truth = CapacitanceModelSpec::power_law(222.96e-12, -346.2e-12);
  Dataset ds2 = noiseless_dataset(power_truth, linspace(100e-9, 6e-6, 41), 1.5e-15);
  FitResult f2 = fit_linear(ds2, PowerLawFamily{});
  CHECK(f2.params[0].value == doctest::Approx(222.96e-12).epsilon(1e-10));
  CHECK(f2.params[1].value == doctest::Approx(-346.2e-12).epsilon(1e-10));
}

TEST_CASE("contact-voltage fit recovers a noiseless lens dataset") {
  double beta = 87e-9, v0_true = 69.93, c_true = 197.69e-12;
  auto truth = CapacitanceModelSpec::modified_lens(paper_lens, c_true);
  SynthSpec spec(truth);
  spec.kind = AbscissaKind::PiezoVoltage;
  spec.abscissae = linspace(20.0, 68.0, 121);
  spec.sigma = {0.0015 * pf};
  spec.calib = PiezoCalibration(beta, v0_true);
  spec.seed = 0;
  // noiseless: draw amplitude zero
  SynthSpec exact_spec = spec;
  exact_spec.sigma = {0.0};
  Dataset exact_ds = generate_synthetic(exact_spec);
  for (auto& p : exact_ds.points) p.sigma = 0.0015 * pf;

  FitResult fit =
      fit_with_contact_voltage(exact_ds, ModifiedLensFamily{paper_lens}, beta, {68.5, 72.0});
  CHECK(fit.converged);
  REQUIRE(fit.params.size() == 2);
  CHECK(fit.params[0].name == "C_tilde");
  CHECK(fit.params[1].name == "V0_PZT");
  CHECK(fit.params[1].value == doctest::Approx(v0_true).epsilon(1e-7));
  CHECK(fit.params[0].value == doctest::Approx(c_true).epsilon(1e-7));
  CHECK(fit.chi2 < 1e-4);  // limited by the scalar minimizer, not the solve
  CHECK(fit.dof == 121 - 2);
  CHECK(!fit.profile.empty());
}

TEST_CASE("contact-voltage fit under noise stays within 4 sigma") {
  double beta = 87e-9, v0_true = 69.93, c_true = 197.69e-12;
  auto truth = CapacitanceModelSpec::modified_lens(paper_lens, c_true);
  SynthSpec spec(truth);
  spec.kind = AbscissaKind::PiezoVoltage;
  spec.abscissae = linspace(20.0, 68.0, 121);
  spec.sigma = {0.0015 * pf};
  spec.calib = PiezoCalibration(beta, v0_true);
  spec.seed = 2024;
  Dataset noisy = generate_synthetic(spec);
  FitResult fit =
      fit_with_contact_voltage(noisy, ModifiedLensFamily{paper_lens}, beta, {68.5, 72.0});
  CHECK(fit.converged);
  CHECK(fit.params[1].sigma > 0.0);
  CHECK(std::abs(fit.params[1].value - v0_true) < 4.0 * fit.params[1].sigma);
  CHECK(std::abs(fit.params[0].value - c_true) < 4.0 * fit.params[0].sigma);
  CHECK(fit.reduced_chi2 > 0.6);
  CHECK(fit.reduced_chi2 < 1.5);
}

TEST_CASE("contact-voltage profile matches a refined grid scan") {
  double beta = 87e-9, v0_true = 69.93;
  auto truth = CapacitanceModelSpec::modified_lens(paper_lens, 197.69e-12);
  SynthSpec spec(truth);
  spec.kind = AbscissaKind::PiezoVoltage;
  spec.abscissae = linspace(20.0, 68.0, 121);
  spec.sigma = {0.0015 * pf};
  spec.calib = PiezoCalibration(beta, v0_true);
  spec.seed = 5;
  Dataset noisy = generate_synthetic(spec);

  double lo = 68.5, hi = 72.0;
  FitResult fit = fit_with_contact_voltage(noisy, ModifiedLensFamily{paper_lens}, beta, {lo, hi});

  const int n = 10000;
  double step = (hi - lo) / (n - 1);
  int best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  std::vector<double> chis(n);
  for (int i = 0; i < n; ++i) {
    double v0 = lo + step * i;
    chis[i] = fit_linear(noisy, ModifiedLensFamily{paper_lens}, PiezoCalibration(beta, v0)).chi2;
    if (chis[i] < fbest) {
      fbest = chis[i];
      best = i;
    }
  }
  REQUIRE(best > 0);
  REQUIRE(best < n - 1);
  double refined = lo + step * best +
                   0.5 * step * (chis[best - 1] - chis[best + 1]) /
                       (chis[best - 1] - 2.0 * chis[best] + chis[best + 1]);
  CHECK(std::abs(fit.params[1].value - refined) < 1e-4);
}

TEST_CASE("contact-voltage fit reports a boundary-pinned minimum") {
  double beta = 87e-9;
  auto truth = CapacitanceModelSpec::modified_lens(paper_lens, 197.69e-12);
  SynthSpec spec(truth);
  spec.kind = AbscissaKind::PiezoVoltage;
  spec.abscissae = linspace(20.0, 68.0, 61);
  spec.sigma = {0.0015 * pf};
  spec.calib = PiezoCalibration(beta, 69.93);
  spec.seed = 3;
  Dataset noisy = generate_synthetic(spec);
  // bracket entirely above the true minimum: profile is monotone there
  FitResult fit = fit_with_contact_voltage(noisy, ModifiedLensFamily{paper_lens}, beta,
                                           {72.0, 75.0});
  CHECK(!fit.converged);
  CHECK(fit.diagnostics.find("boundary") != std::string::npos);
  CHECK(!fit.profile.empty());
  // diagnostics still come with a full report
  std::string json = fit_report_json(fit);
  CHECK(json.find("\"converged\": false") != std::string::npos);
}

TEST_CASE("synthetic generation: determinism, sigma-zero limit, errors") {
  auto truth = CapacitanceModelSpec::power_law(222.96e-12, -346.2e-12);
  SynthSpec spec(truth);
  spec.abscissae = linspace(100e-9, 6e-6, 77);
  spec.sigma = {1e-15};
  spec.seed = 99;
  Dataset a = generate_synthetic(spec);
  Dataset b = generate_synthetic(spec);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i)
    CHECK(a.points[i].capacitance == b.points[i].capacitance);  // bit identical

  SynthSpec exact = spec;
  exact.sigma = {0.0};
  Dataset c = generate_synthetic(exact);
  for (const auto& p : c.points)
    CHECK(p.capacitance == models::evaluate_model(truth, p.x));

  SynthSpec bad = spec;
  bad.abscissae[3] = -1e-9;
  bad.truth = CapacitanceModelSpec::exact_sphere(mto_sphere);
  try {
    generate_synthetic(bad);
    FAIL("expected generation error");
  } catch (const domain_error& e) {
    CHECK(std::string(e.what()).find("design point 3") != std::string::npos);
  }

  SynthSpec no_calib = spec;
  no_calib.kind = AbscissaKind::PiezoVoltage;
  CHECK_THROWS_AS(generate_synthetic(no_calib), error);
}

TEST_CASE("synthetic noise has the requested scale") {
  auto truth = CapacitanceModelSpec::power_law(222.96e-12, -346.2e-12);
  double sigma = 2e-4 * pf;
  num::CompensatedSum sq;
  std::size_t count = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SynthSpec spec(truth);
    spec.abscissae = linspace(500.5e-9, 4000.2e-9, 351);
    spec.sigma = {sigma};
    spec.seed = seed;
    Dataset ds = generate_synthetic(spec);
    for (const auto& p : ds.points) {
      double r = p.capacitance - models::evaluate_model(truth, p.x);
      sq.add(r * r);
      ++count;
    }
  }
  double pooled = std::sqrt(sq.value() / static_cast<double>(count));
  CHECK(pooled > 1.8e-4 * pf);
  CHECK(pooled < 2.2e-4 * pf);
}

TEST_CASE("fit report json round trip") {
  auto truth = mto_truth();
  SynthSpec spec(truth);
  spec.abscissae = linspace(500.5e-9, 4000.2e-9, 51);
  spec.sigma = {2e-4 * pf};
  spec.seed = 42;
  Dataset noisy = generate_synthetic(spec);
  FitResult fit = fit_linear(noisy, ExactParasiticFamily{mto_sphere});
  fit.inputs.seed = spec.seed;
  fit.inputs.theta = 0.5;

  std::string json = fit_report_json(fit);
  FitResult parsed = parse_fit_report_json(json);
  REQUIRE(parsed.params.size() == fit.params.size());
  for (std::size_t i = 0; i < fit.params.size(); ++i) {
    CHECK(parsed.params[i].name == fit.params[i].name);
    CHECK(parsed.params[i].value == fit.params[i].value);
    CHECK(parsed.params[i].sigma == fit.params[i].sigma);
    CHECK(parsed.params[i].unit == fit.params[i].unit);
  }
  CHECK(parsed.chi2 == fit.chi2);
  CHECK(parsed.dof == fit.dof);
  CHECK(parsed.reduced_chi2 == fit.reduced_chi2);
  CHECK(parsed.p_value == fit.p_value);
  CHECK(parsed.excluded_points == fit.excluded_points);
  CHECK(parsed.converged == fit.converged);
  CHECK(parsed.inputs.seed == fit.inputs.seed);
  CHECK(parsed.inputs.theta == fit.inputs.theta);
  CHECK(models::model_label(parsed.model) == models::model_label(fit.model));

  // reduced chi2 consistency to 12 digits
  CHECK(fit.reduced_chi2 ==
        doctest::Approx(fit.chi2 / static_cast<double>(fit.dof)).epsilon(1e-12));

  std::string text = fit_report_text(fit);
  CHECK(text.find("A1_tilde") != std::string::npos);
  CHECK(text.find("reduced_chi2") != std::string::npos);

  CHECK_THROWS_AS(parse_fit_report_json("{not json"), error);
  CHECK_THROWS_AS(parse_fit_report_json("{\"chi2\": 1}"), error);
}

TEST_CASE("synth sidecar json names the generator") {
  auto truth = mto_truth();
  SynthSpec spec(truth);
  spec.abscissae = linspace(500.5e-9, 4000.2e-9, 11);
  spec.sigma = {2e-4 * pf};
  spec.seed = 42;
  std::string sidecar = synth_sidecar_json(spec);
  CHECK(sidecar.find("splitmix64-boxmuller-v1") != std::string::npos);
  CHECK(sidecar.find("\"seed\": 42") != std::string::npos);
  CHECK(sidecar.find("exact-sphere") != std::string::npos);
}

TEST_CASE("power-law refit: frozen constants, exact recovery, grid refinement") {
  auto [a1, a3] = refit_power_law_constants(paper_lens);
  // frozen from the independent lstsq oracle
  CHECK(a1 == doctest::Approx(33.2546e-12).epsilon(1e-3));
  CHECK(a3 == doctest::Approx(-384.663e-12).epsilon(1e-3));

  // a curve already of the fitted form is recovered exactly
  auto curve = [&](double d) { return 5.5e-12 - 41.0e-12 * std::pow(d / paper_lens.r, 0.3); };
  auto [b1, b3] = fit_power_law(curve, paper_lens.r, 30e-9, 100e-9);
  CHECK(b1 == doctest::Approx(5.5e-12).epsilon(1e-12));
  CHECK(b3 == doctest::Approx(-41.0e-12).epsilon(1e-12));

  // doubling the grid density moves the constants by < 0.1%
  auto dense = fit_power_law(
      [&](double d) { return models::modified_capacitance(d, paper_lens, 0.0); }, paper_lens.r,
      30e-9, 100e-9, 400);
  CHECK(std::abs(dense.first / a1 - 1.0) < 1e-3);
  CHECK(std::abs(dense.second / a3 - 1.0) < 1e-3);
}

TEST_CASE("dataset csv round trip") {
  auto truth = mto_truth();
  SynthSpec spec(truth);
  spec.abscissae = linspace(500.5e-9, 4000.2e-9, 13);
  spec.sigma = {2e-4 * pf};
  spec.seed = 8;
  Dataset ds = generate_synthetic(spec);
  std::string csv = dataset_to_csv(ds);
  Dataset back = dataset_from_csv(csv);
  REQUIRE(back.points.size() == ds.points.size());
  CHECK(back.kind == ds.kind);
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    CHECK(back.points[i].x == doctest::Approx(ds.points[i].x).epsilon(1e-15));
    CHECK(back.points[i].capacitance ==
          doctest::Approx(ds.points[i].capacitance).epsilon(1e-15));
    CHECK(back.points[i].sigma == doctest::Approx(ds.points[i].sigma).epsilon(1e-15));
  }
  // emission is deterministic
  CHECK(dataset_to_csv(ds) == csv);
}

TEST_CASE("dataset csv format errors carry line numbers") {
  CHECK_THROWS_AS(dataset_from_csv(""), format_error);

  try {
    dataset_from_csv("# kind=separation_nm\nx,cap_pF\n1,2\n");
    FAIL("expected header error");
  } catch (const format_error& e) {
    CHECK(e.line() == 2);
  }

  try {
    dataset_from_csv("# kind=separation_nm\nx,cap_pF,sigma_pF\n1,2\n");
    FAIL("expected field-count error");
  } catch (const format_error& e) {
    CHECK(e.line() == 3);
  }

  try {
    dataset_from_csv("# kind=separation_nm\nx,cap_pF,sigma_pF\n1,2,0.1\n1,abc,0.1\n");
    FAIL("expected parse error");
  } catch (const format_error& e) {
    CHECK(e.line() == 4);
  }

  try {
    dataset_from_csv("# kind=parsec\nx,cap_pF,sigma_pF\n1,2,0.1\n");
    FAIL("expected kind error");
  } catch (const format_error& e) {
    CHECK(e.line() == 1);
  }

  // negative sigma is rejected; zero sigma is storable (noise-free files)
  CHECK_THROWS_AS(dataset_from_csv("# kind=separation_nm\nx,cap_pF,sigma_pF\n1,2,-0.1\n"),
                  format_error);
  Dataset zero = dataset_from_csv("# kind=separation_nm\nx,cap_pF,sigma_pF\n1,2,0\n");
  CHECK(zero.points[0].sigma == 0.0);

  // missing kind line
  CHECK_THROWS_AS(dataset_from_csv("x,cap_pF,sigma_pF\n1,2,0.1\n"), format_error);
}

TEST_CASE("dataset csv file io is atomic and unit-converted") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "capcal_test_io";
  fs::create_directories(dir);
  fs::path file = dir / "ds.csv";

  Dataset ds;
  ds.kind = AbscissaKind::Separation;
  ds.points.push_back(Measurement{500.5e-9, 0.063710199e-12, 2e-16});
  save_dataset_csv(ds, file);
  CHECK(!fs::exists(file.string() + ".tmp"));
  Dataset back = load_dataset_csv(file);
  CHECK(back.points[0].x == doctest::Approx(500.5e-9).epsilon(1e-15));
  CHECK(back.label == "ds");

  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# kind=separation_nm");
  std::getline(in, line);
  CHECK(line == "x,cap_pF,sigma_pF");
  std::getline(in, line);
  CHECK(line.substr(0, 6) == "500.5,");  // nm at the boundary

  CHECK_THROWS_AS(load_dataset_csv(dir / "missing.csv"), io_error);
  fs::remove_all(dir);
}

TEST_CASE("excluded-point accounting reproduces the contact-voltage pathology") {
  // abscissae straddle V0 = 68.43; exactly the points with V_PZT >= V0 drop
  // out of a log-domain fit
  std::vector<double> volts = linspace(60.0, 68.76, 45);
  auto truth = CapacitanceModelSpec::modified_lens(paper_lens, 197.69e-12);
  PiezoCalibration gen_calib(87e-9, 69.93);
  SynthSpec spec(truth);
  spec.kind = AbscissaKind::PiezoVoltage;
  spec.abscissae = volts;
  spec.sigma = {0.0015 * pf};
  spec.calib = gen_calib;
  spec.seed = 1;
  Dataset ds = generate_synthetic(spec);

  PiezoCalibration fit_calib(87e-9, 68.43);
  std::size_t expected = 0;
  for (double v : volts)
    if (v >= 68.43) ++expected;
  FitResult fit = fit_linear(ds, ModifiedLensFamily{paper_lens}, fit_calib);
  CHECK(fit.excluded_points == expected);
  CHECK(expected > 0);
  CHECK(fit.dof == ds.points.size() - expected - 1);
}
