#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bethelab {

// Refusal when an exhaustive computation would exceed its configured cap.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, std::uint64_t required, std::uint64_t cap)
      : std::runtime_error(what + ": requires " + std::to_string(required) +
                           " but the cap is " + std::to_string(cap)),
        required_(required), cap_(cap) {}
  std::uint64_t required() const { return required_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t required_, cap_;
};

// Operation called on an object whose state does not permit it.
class InvalidState : public std::logic_error {
  using std::logic_error::logic_error;
};

// A guaranteed bound was violated; this signals a bug, not bad input.
class InternalError : public std::logic_error {
  using std::logic_error::logic_error;
};

// No object satisfying the requested integrality/balance constraints exists.
class Infeasible : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical routine stopped before meeting its tolerance.
class NotConverged : public std::runtime_error {
 public:
  NotConverged(const std::string& what, double residual)
      : std::runtime_error(what + " (last residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

inline constexpr std::uint64_t kDefaultAssignmentCap = std::uint64_t{1} << 20;

inline void check_budget(const char* what, std::uint64_t required, std::uint64_t cap) {
  if (required > cap) throw BudgetExceeded(what, required, cap);
}

// q^n with saturation, for budget checks.
inline std::uint64_t saturating_pow(std::uint64_t q, int n) {
  std::uint64_t r = 1;
  for (int i = 0; i < n; ++i) {
    if (q != 0 && r > UINT64_MAX / q) return UINT64_MAX;
    r *= q;
  }
  return r;
}

}  // namespace bethelab
