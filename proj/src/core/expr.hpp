#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace qcrit {

using ParamMap = std::map<std::string, double, std::less<>>;

/// Real-valued arithmetic expression over named parameters.
///
/// Supports + - * / ^, unary minus, parentheses, the constant `pi`, and
/// sin cos tan exp log sqrt abs sinh cosh. Immutable; copies share the tree.
class Expr {
 public:
  struct Node;

  Expr();  // constant zero
  static Expr constant(double value);
  /// Throws Error(Parse) on malformed input.
  static Expr parse(std::string_view text);

  /// Throws Error(Validation) when a referenced parameter is unbound.
  double eval(const ParamMap& params) const;

  std::set<std::string> identifiers() const;
  bool is_literal() const { return literal_.has_value(); }
  std::optional<double> literal() const { return literal_; }
  const std::string& source() const { return source_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
  std::optional<double> literal_;
};

}  // namespace qcrit
