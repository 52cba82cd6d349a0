#ifndef VARSIG_ERRORS_HPP
#define VARSIG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace varsig {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data cannot support the requested quantity (zero sums of squares,
// phi exactly 0 or 1, non-finite values, windows that do not fit).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// A segment statistic needs a log of a non-positive partial sum.
class DegenerateSegment : public Error {
 public:
  using Error::Error;
};

// Beta mass of a truncation set too small to represent.
class NumericalUnderflow : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unparseable input file or scenario.
class InputError : public Error {
 public:
  InputError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace varsig

#endif  // VARSIG_ERRORS_HPP
