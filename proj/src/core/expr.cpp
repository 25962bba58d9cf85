#include "core/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "core/error.hpp"

namespace qcrit {

struct Expr::Node {
  enum class Kind { Number, Param, Unary, Binary, Call } kind;
  double value = 0.0;
  std::string name;  // parameter or function name
  char op = 0;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::map<std::string, double (*)(double), std::less<>>& functions() {
  static const std::map<std::string, double (*)(double), std::less<>> table = {
      {"sin", [](double x) { return std::sin(x); }},
      {"cos", [](double x) { return std::cos(x); }},
      {"tan", [](double x) { return std::tan(x); }},
      {"exp", [](double x) { return std::exp(x); }},
      {"log", [](double x) { return std::log(x); }},
      {"sqrt", [](double x) { return std::sqrt(x); }},
      {"abs", [](double x) { return std::abs(x); }},
      {"sinh", [](double x) { return std::sinh(x); }},
      {"cosh", [](double x) { return std::cosh(x); }},
  };
  return table;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    auto node = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::Parse, "expression '" + std::string(text_) + "': " + msg +
                                      " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make_binary(char op, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Node::Kind::Binary;
    n->op = op;
    n->args = {std::move(lhs), std::move(rhs)};
    return n;
  }

  NodePtr expression() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = make_binary('+', lhs, term());
      else if (accept('-')) lhs = make_binary('-', lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make_binary('*', lhs, unary());
      else if (accept('/')) lhs = make_binary('/', lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Node::Kind::Unary;
      n->op = '-';
      n->args = {unary()};
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make_binary('^', base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (accept('(')) {
      auto inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    double v = 0.0;
    const char* begin = text_.data() + pos_;
    auto res = std::from_chars(begin, text_.data() + text_.size(), v);
    if (res.ec != std::errc()) fail("bad number");
    pos_ += static_cast<size_t>(res.ptr - begin);
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Node::Kind::Number;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (accept('(')) {
      if (!functions().contains(name)) fail("unknown function '" + name + "'");
      auto arg = expression();
      if (!accept(')')) fail("expected ')' after function argument");
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Node::Kind::Call;
      n->name = name;
      n->args = {arg};
      return n;
    }
    auto n = std::make_shared<Expr::Node>();
    if (name == "pi") {
      n->kind = Expr::Node::Kind::Number;
      n->value = std::numbers::pi;
    } else {
      n->kind = Expr::Node::Kind::Param;
      n->name = name;
    }
    return n;
  }

  std::string_view text_;
  size_t pos_ = 0;
};

double evaluate(const Expr::Node& n, const ParamMap& params) {
  using K = Expr::Node::Kind;
  switch (n.kind) {
    case K::Number:
      return n.value;
    case K::Param: {
      auto it = params.find(n.name);
      if (it == params.end())
        throw Error(ErrorCode::Validation, "unbound parameter '" + n.name + "'");
      return it->second;
    }
    case K::Unary:
      return -evaluate(*n.args[0], params);
    case K::Call:
      return functions().find(n.name)->second(evaluate(*n.args[0], params));
    case K::Binary: {
      double a = evaluate(*n.args[0], params);
      double b = evaluate(*n.args[1], params);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: return std::pow(a, b);
      }
    }
  }
  return 0.0;
}

void collect(const Expr::Node& n, std::set<std::string>& out) {
  if (n.kind == Expr::Node::Kind::Param) out.insert(n.name);
  for (const auto& a : n.args) collect(*a, out);
}

}  // namespace

Expr::Expr() {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  root_ = std::move(n);
  source_ = "0";
  literal_ = 0.0;
}

Expr Expr::constant(double value) {
  Expr e;
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  n->value = value;
  e.root_ = std::move(n);
  e.source_ = format_double(value);
  e.literal_ = value;
  return e;
}

Expr Expr::parse(std::string_view text) {
  Expr e;
  e.root_ = Parser(text).parse();
  e.source_ = std::string(text);
  e.literal_.reset();
  return e;
}

double Expr::eval(const ParamMap& params) const { return evaluate(*root_, params); }

std::set<std::string> Expr::identifiers() const {
  std::set<std::string> out;
  collect(*root_, out);
  return out;
}

}  // namespace qcrit
