#pragma once

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace naba {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Two spectral parameters hit a pole of f or g.
class PoleError : public Error {
public:
  PoleError(std::complex<double> a, std::complex<double> b, const std::string &where = "")
      : Error(describe(a, b, where)), first(a), second(b) {}
  std::complex<double> first, second;

private:
  static std::string describe(std::complex<double> a, std::complex<double> b,
                              const std::string &where) {
    std::ostringstream os;
    os.precision(17);
    os << "pole: arguments " << a << " and " << b << " coincide";
    if (!where.empty())
      os << " in " << where;
    return os.str();
  }
};

class ArgumentError : public Error {
public:
  using Error::Error;
};

class CapacityError : public Error {
public:
  using Error::Error;
};

// On-shell (or similar) requirement not met by the inputs.
class PreconditionError : public Error {
public:
  using Error::Error;
};

class UnsupportedError : public Error {
public:
  using Error::Error;
};

class ConvergenceError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class DigestError : public Error {
public:
  using Error::Error;
};

} // namespace naba
