#ifndef CAPCAL_DATASET_HPP
#define CAPCAL_DATASET_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace capcal::calib {

enum class AbscissaKind {
  PiezoVoltage,  // x in volts applied to the piezo
  Separation,    // x in meters, absolute separation
};

struct Measurement {
  double x = 0.0;            // V or m, per dataset kind
  double capacitance = 0.0;  // F
  double sigma = 0.0;        // F, > 0
};

struct Dataset {
  AbscissaKind kind = AbscissaKind::Separation;
  std::vector<Measurement> points;
  std::string label;
};

// CSV interchange format:
//   # kind=piezo_volts | # kind=separation_nm
//   x,cap_pF,sigma_pF
//   <rows, decimal point, UTF-8>
// x is in volts for piezo datasets and nanometers for separation datasets.
std::string dataset_to_csv(const Dataset& ds);
Dataset dataset_from_csv(std::string_view text, std::string label = {});

Dataset load_dataset_csv(const std::filesystem::path& path);
// Written atomically (temp file + rename).
void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace capcal::calib

#endif
