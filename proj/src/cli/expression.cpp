#include "vsoliton/cli/expression.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace vsoliton::cli {

ExpressionError::ExpressionError(const std::string& what, std::size_t position)
    : DomainError("expression error at column " + std::to_string(position + 1) + ": " + what), position_(position) {}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  std::vector<TrigTerm> run() {
    std::vector<TrigTerm> out;
    skip();
    if (done()) throw ExpressionError("empty expression", pos_);
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') {
      sign = take() == '-' ? -1.0 : 1.0;
      skip();
    }
    out.push_back(term(sign));
    skip();
    while (!done()) {
      const char c = take();
      if (c != '+' && c != '-') throw ExpressionError(std::string("expected '+' or '-', got '") + c + "'", pos_ - 1);
      skip();
      out.push_back(term(c == '-' ? -1.0 : 1.0));
      skip();
    }
    return out;
  }

 private:
  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  char take() { return s_[pos_++]; }
  void skip() {
    while (!done() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_wave() const { return s_.substr(pos_, 3) == "cos" || s_.substr(pos_, 3) == "sin"; }

  TrigTerm term(double sign) {
    TrigTerm t;
    t.coefficient = sign;
    if (at_wave()) {
      wave(t);
      return t;
    }
    t.coefficient *= number();
    skip();
    if (peek() == '*') {
      ++pos_;
      skip();
      if (!at_wave()) throw ExpressionError("expected cos(...) or sin(...) after '*'", pos_);
      wave(t);
    }
    return t;
  }

  double number() {
    const std::size_t start = pos_;
    double value = 0.0;
    auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), value);
    if (res.ec != std::errc() || res.ptr == s_.data() + start) throw ExpressionError("expected a number", start);
    if (!std::isfinite(value)) throw ExpressionError("number is not finite", start);
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    return value;
  }

  int integer() {
    skip();
    const std::size_t start = pos_;
    int value = 0;
    const char* first = s_.data() + pos_;
    if (peek() == '+') ++first;
    auto res = std::from_chars(first, s_.data() + s_.size(), value);
    if (res.ec != std::errc() || res.ptr == first) throw ExpressionError("expected an integer frequency", start);
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    skip();
    return value;
  }

  void wave(TrigTerm& t) {
    t.kind = s_.substr(pos_, 3) == "cos" ? TrigTerm::Kind::Cos : TrigTerm::Kind::Sin;
    pos_ += 3;
    skip();
    if (peek() != '(') throw ExpressionError("expected '('", pos_);
    ++pos_;
    t.frequency.push_back(integer());
    while (peek() == ',') {
      ++pos_;
      t.frequency.push_back(integer());
    }
    if (peek() != ')') throw ExpressionError("expected ')'", pos_);
    ++pos_;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression e;
  for (TrigTerm& t : Parser(text).run()) {
    if (t.coefficient != 0.0) e.terms_.push_back(std::move(t));
  }
  return e;
}

int Expression::max_frequency() const {
  int m = 0;
  for (const auto& t : terms_)
    for (int f : t.frequency) m = std::max(m, std::abs(f));
  return m;
}

RealField Expression::evaluate(const GridSpec& grid) const {
  const int d = grid.dims();
  for (const auto& t : terms_) {
    if (t.kind != TrigTerm::Kind::Constant && static_cast<int>(t.frequency.size()) != d) {
      throw DomainError("expression term has " + std::to_string(t.frequency.size()) + " frequencies, grid needs " +
                        std::to_string(d));
    }
  }
  const double base = 2.0 * std::numbers::pi / grid.period();
  return RealField::from_function(grid, [&](std::span<const double> x) {
    double s = 0.0;
    for (const auto& t : terms_) {
      if (t.kind == TrigTerm::Kind::Constant) {
        s += t.coefficient;
        continue;
      }
      double arg = 0.0;
      for (int a = 0; a < d; ++a) arg += t.frequency[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
      arg *= base;
      s += t.coefficient * (t.kind == TrigTerm::Kind::Cos ? std::cos(arg) : std::sin(arg));
    }
    return s;
  });
}

std::string Expression::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const TrigTerm& t = terms_[i];
    const double c = t.coefficient;
    if (i > 0) out += c < 0.0 ? " - " : " + ";
    else if (c < 0.0) out += "-";
    std::snprintf(buf, sizeof buf, "%.17g", std::abs(c));
    out += buf;
    if (t.kind == TrigTerm::Kind::Constant) continue;
    out += t.kind == TrigTerm::Kind::Cos ? "*cos(" : "*sin(";
    for (std::size_t a = 0; a < t.frequency.size(); ++a) {
      if (a) out += ",";
      out += std::to_string(t.frequency[a]);
    }
    out += ")";
  }
  return out;
}

}  // namespace vsoliton::cli
