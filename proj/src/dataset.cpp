#include "capcal/dataset.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "capcal/constants.hpp"
#include "capcal/errors.hpp"

namespace capcal::calib {

namespace {

constexpr const char* kind_piezo = "piezo_volts";
constexpr const char* kind_separation = "separation_nm";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view field, std::size_t line_no, const char* what) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw format_error(std::string("could not parse ") + what + " from '" + std::string(field) +
                           "'",
                       line_no);
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::string dataset_to_csv(const Dataset& ds) {
  std::ostringstream os;
  os << "# kind="
     << (ds.kind == AbscissaKind::PiezoVoltage ? kind_piezo : kind_separation) << "\n";
  os << "x,cap_pF,sigma_pF\n";
  for (const Measurement& m : ds.points) {
    double x_out = ds.kind == AbscissaKind::Separation ? m.x * units::nm_per_m : m.x;
    os << format_double(x_out) << ',' << format_double(m.capacitance * units::pf_per_f) << ','
       << format_double(m.sigma * units::pf_per_f) << "\n";
  }
  return os.str();
}

Dataset dataset_from_csv(std::string_view text, std::string label) {
  Dataset ds;
  ds.label = std::move(label);
  bool kind_seen = false;
  bool header_seen = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                           : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      if (body.starts_with("kind=")) {
        std::string_view kind = trim(body.substr(5));
        if (kind == kind_piezo)
          ds.kind = AbscissaKind::PiezoVoltage;
        else if (kind == kind_separation)
          ds.kind = AbscissaKind::Separation;
        else
          throw format_error("unknown dataset kind '" + std::string(kind) + "'", line_no);
        kind_seen = true;
      }
      continue;  // other comment lines are tolerated
    }

    if (!header_seen) {
      if (line != "x,cap_pF,sigma_pF")
        throw format_error("expected header 'x,cap_pF,sigma_pF', got '" + std::string(line) + "'",
                           line_no);
      if (!kind_seen)
        throw format_error("missing '# kind=piezo_volts' / '# kind=separation_nm' line before the "
                           "header",
                           line_no);
      header_seen = true;
      continue;
    }

    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string_view::npos ? std::string_view::npos
                                                  : line.find(',', c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos ||
        line.find(',', c2 + 1) != std::string_view::npos)
      throw format_error("expected three comma-separated fields", line_no);

    Measurement m;
    double x_raw = parse_double(trim(line.substr(0, c1)), line_no, "x");
    m.x = ds.kind == AbscissaKind::Separation ? x_raw * units::m_per_nm : x_raw;
    m.capacitance =
        parse_double(trim(line.substr(c1 + 1, c2 - c1 - 1)), line_no, "cap_pF") * units::f_per_pf;
    m.sigma = parse_double(trim(line.substr(c2 + 1)), line_no, "sigma_pF") * units::f_per_pf;
    if (!(m.sigma >= 0.0)) throw format_error("sigma_pF must be >= 0", line_no);
    ds.points.push_back(m);
  }

  if (!header_seen) throw format_error("missing dataset header", line_no);
  if (ds.points.empty()) throw format_error("dataset has no points", line_no);
  return ds;
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("could not open dataset file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw io_error("could not read dataset file '" + path.string() + "'");
  return dataset_from_csv(buf.str(), path.stem().string());
}

void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("could not open '" + tmp.string() + "' for writing");
    out << dataset_to_csv(ds);
    out.flush();
    if (!out) throw io_error("could not write '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw io_error("could not move '" + tmp.string() + "' to '" + path.string() + "': " +
                   ec.message());
  }
}

}  // namespace capcal::calib
