#pragma once

#include <stdexcept>
#include <string>

namespace coinsieve {

// Raised when an input violates an operation's precondition.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when a computation would exceed its configured work budget.
// Operations that can return partial results prefer flagging over throwing.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

}  // namespace coinsieve
