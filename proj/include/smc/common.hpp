// Shared aliases, numeric constants and error types.

#ifndef SMC_COMMON_HPP
#define SMC_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace smc {

using Matrix = Eigen::MatrixXd;  // rows = instances, cols = dimensions
using Vector = Eigen::VectorXd;

// Sentinel standing in for log(0); exp() of it underflows to exactly 0.0,
// which keeps the weight arithmetic total without special cases.
inline constexpr double kLogZero = -1e30;

inline constexpr double kPi = 3.14159265358979323846;

// Raised when an optimisation or density computation produces non-finite
// values. Mapped to exit code 3 by the CLI; config/input problems use
// std::invalid_argument (exit code 2).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline bool all_finite(const Eigen::Ref<const Matrix>& m) {
    return m.allFinite();
}

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace smc

#endif  // SMC_COMMON_HPP
