#ifndef CACHE3D_ERRORS_HPP
#define CACHE3D_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cache3d {

// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid input or violated type invariant (non-positive size, broken
// ordering, bad parameter range, ...).
class DomainError : public Error {
  public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Offered load at or beyond the NoC queue-model pole. Callers treat the
// design point as infeasible.
class SaturationError : public Error {
  public:
    SaturationError(double m_s, double m_saturation)
        : Error("NoC saturated: M_S = " + std::to_string(m_s) +
                " >= m_saturation = " + std::to_string(m_saturation)),
          m_s_(m_s),
          m_saturation_(m_saturation) {}
    double offered_rate() const { return m_s_; }
    double saturation_rate() const { return m_saturation_; }

  private:
    double m_s_;
    double m_saturation_;
};

// Power-law fitting failures (too few samples, degenerate abscissae).
class FitError : public Error {
  public:
    explicit FitError(const std::string& msg) : Error(msg) {}
};

// Config-file parsing/validation failures (carries file/line context).
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Every candidate hierarchy depth is infeasible under the given budgets.
class NoViableConfig : public Error {
  public:
    explicit NoViableConfig(const std::string& msg) : Error(msg) {}
};

}  // namespace cache3d

#endif  // CACHE3D_ERRORS_HPP
