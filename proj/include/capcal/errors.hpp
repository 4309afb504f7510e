#ifndef CAPCAL_ERRORS_HPP
#define CAPCAL_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace capcal {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input to a model or kernel. Message always names the offending
// quantity and its value.
class domain_error : public error {
 public:
  domain_error(const std::string& quantity, double value, const std::string& requirement);
  const std::string& quantity() const { return quantity_; }
  double value() const { return value_; }

 private:
  std::string quantity_;
  double value_;
};

// A series hit the term cap before meeting the tail tolerance. Carries the
// partial sum and term count so callers can report the state.
class convergence_error : public error {
 public:
  convergence_error(const std::string& what, double partial_sum, std::size_t terms_used);
  double partial_sum() const { return partial_sum_; }
  std::size_t terms_used() const { return terms_used_; }

 private:
  double partial_sum_;
  std::size_t terms_used_;
};

// Rank-deficient least-squares design; names the offending column.
class singular_error : public error {
 public:
  singular_error(const std::string& what, std::size_t column);
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

// Every point of a fit was excluded; there is nothing to minimize.
class empty_objective_error : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  using error::error;
};

// Malformed dataset CSV; carries the 1-based line number.
class format_error : public error {
 public:
  format_error(const std::string& what, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace capcal

#endif
