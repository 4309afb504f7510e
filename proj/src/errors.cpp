#include "capcal/errors.hpp"

#include <sstream>

namespace capcal {

namespace {

std::string domain_message(const std::string& quantity, double value,
                           const std::string& requirement) {
  std::ostringstream os;
  os << "domain error: " << quantity << " = " << value << " (" << requirement << ")";
  return os.str();
}

}  // namespace

domain_error::domain_error(const std::string& quantity, double value,
                           const std::string& requirement)
    : error(domain_message(quantity, value, requirement)), quantity_(quantity), value_(value) {}

convergence_error::convergence_error(const std::string& what, double partial_sum,
                                     std::size_t terms_used)
    : error(what), partial_sum_(partial_sum), terms_used_(terms_used) {}

singular_error::singular_error(const std::string& what, std::size_t column)
    : error(what), column_(column) {}

format_error::format_error(const std::string& what, std::size_t line)
    : error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

}  // namespace capcal
