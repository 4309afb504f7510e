#ifndef CAPCAL_REPORT_HPP
#define CAPCAL_REPORT_HPP

#include <string>
#include <string_view>

#include "capcal/calibration.hpp"

namespace capcal::calib {

inline constexpr int report_format_version = 1;

// Machine-readable fit report. Stable field names:
//   model, params[{name,value,sigma,unit}], chi2, dof, reduced_chi2,
//   p_value, excluded_points, inputs{beta,theta,seed,tolerances}, versions.
// Values are SI; units are named per parameter.
std::string fit_report_json(const FitResult& fit);

// Human-readable rendering of the same fields.
std::string fit_report_text(const FitResult& fit);

// Inverse of fit_report_json for the fields it carries (model geometry is
// reconstructed; profile traces are not serialized).
FitResult parse_fit_report_json(std::string_view json_text);

// Sidecar describing a synthetic dataset: truth model, design, sigma, seed,
// generator version.
std::string synth_sidecar_json(const SynthSpec& spec);

}  // namespace capcal::calib

#endif
