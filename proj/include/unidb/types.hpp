#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace unidb {

using StateVec = Eigen::VectorXd;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Division by a vanishing bridge quantity (sigma'_T, d_{T,inf}, ...).
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Terminal penalty coefficient. Infinity (the Doob limit) is a first-class
// value, not a large float: formulas branch on it explicitly.
class Gamma {
 public:
  static Gamma finite(double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("gamma must be positive and finite (or Gamma::infinity())");
    }
    return Gamma(v, false);
  }
  static Gamma infinity() {
    return Gamma(std::numeric_limits<double>::infinity(), true);
  }
  static Gamma parse(const std::string& s);

  bool is_infinite() const { return infinite_; }
  double value() const {
    if (infinite_) throw DomainError("gamma is infinite");
    return value_;
  }
  // 1/gamma, with the limit value 0 at gamma = inf.
  double inv() const { return infinite_ ? 0.0 : 1.0 / value_; }
  std::string str() const;

  friend bool operator==(const Gamma& a, const Gamma& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  Gamma(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

}  // namespace unidb
