#pragma once

// Trigonometric expressions used for φ, F and u* in run configs:
//
//   expr := [sign] term (sign term)*
//   term := number | number '*' wave | wave
//   wave := ('cos' | 'sin') '(' int (',' int)* ')'
//
// cos(m) stands for cos(2π/period Σ_a m_a x_a) with one integer per real
// axis. Example: "0.05*cos(1,0) - 0.02*sin(0,1) + 0.3".

#include <string>
#include <string_view>
#include <vector>

#include "vsoliton/errors.hpp"
#include "vsoliton/grid.hpp"

namespace vsoliton::cli {

class ExpressionError : public DomainError {
 public:
  ExpressionError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct TrigTerm {
  enum class Kind { Constant, Cos, Sin };
  Kind kind = Kind::Constant;
  double coefficient = 0.0;
  std::vector<int> frequency;
};

class Expression {
 public:
  static Expression parse(std::string_view text);

  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Largest |m_a| over all terms.
  int max_frequency() const;
  /// Throws DomainError when a frequency vector does not have 2n entries.
  RealField evaluate(const GridSpec& grid) const;
  /// Canonical text; parse(to_string()) reproduces the terms exactly.
  std::string to_string() const;

 private:
  std::vector<TrigTerm> terms_;
};

}  // namespace vsoliton::cli
