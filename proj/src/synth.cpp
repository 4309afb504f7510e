#include <cmath>
#include <numbers>
#include <sstream>

#include "capcal/calibration.hpp"
#include "capcal/errors.hpp"

namespace capcal::calib {

namespace {

// Counter-based draws: the i-th output of the splitmix64 sequence for a
// given seed, computable in O(1) so every point is independent of
// evaluation order.
std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Top 53 bits -> (0, 1] (open at zero so log() below is safe).
double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// Top 53 bits -> [0, 1).
double to_unit_half_open(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Box-Muller transform of two counter-based uniforms.
double standard_normal_at(std::uint64_t seed, std::uint64_t point_index) {
  double u1 = to_unit_open(splitmix64_at(seed, 2 * point_index));
  double u2 = to_unit_half_open(splitmix64_at(seed, 2 * point_index + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::string synth_generator_name() { return "splitmix64-boxmuller-v1"; }

Dataset generate_synthetic(const SynthSpec& spec) {
  if (spec.abscissae.empty()) throw error("synthetic design has no abscissae");
  if (spec.sigma.empty() ||
      (spec.sigma.size() != 1 && spec.sigma.size() != spec.abscissae.size()))
    throw error("sigma must have one entry or one entry per design point");
  for (double s : spec.sigma)
    if (!(s >= 0.0)) throw domain_error("sigma", s, "must be >= 0");
  if (spec.kind == AbscissaKind::PiezoVoltage && !spec.calib)
    throw error("piezo-voltage synthesis requires a piezo calibration");

  Dataset ds;
  ds.kind = spec.kind;
  ds.label = spec.label.empty() ? "synthetic" : spec.label;
  ds.points.reserve(spec.abscissae.size());
  for (std::size_t i = 0; i < spec.abscissae.size(); ++i) {
    double x = spec.abscissae[i];
    double d = spec.kind == AbscissaKind::PiezoVoltage ? piezo_to_separation(x, *spec.calib) : x;
    double truth;
    try {
      truth = models::evaluate_model(spec.truth, d);
    } catch (const error& e) {
      std::ostringstream os;
      os << "not evaluable at design point " << i << " (d = " << d << "): " << e.what();
      throw domain_error("design point abscissa", x, os.str());
    }
    double s = spec.sigma.size() == 1 ? spec.sigma[0] : spec.sigma[i];
    double noise = s == 0.0 ? 0.0 : s * standard_normal_at(spec.seed, i);
    ds.points.push_back(Measurement{x, truth + noise, s});
  }
  return ds;
}

}  // namespace capcal::calib
