#pragma once

// Exact operators on finitely supported vectors of l^2(Z): the bilateral
// shift B (B e_n = e_{n+1}), its inverse, the reflection J (J e_n = e_{-n}) and
// the half-line projection P (P e_n = e_n for n >= 0, else 0), closed under
// scalars, sums, products and adjoints. Coefficients are Gaussian rationals,
// so every identity below is checked without rounding.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "leiblab/errors.hpp"
#include "leiblab/matrix_io.hpp"

namespace leiblab::shiftlab {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

/// re + i im with exact rational parts.
struct GaussRational {
  Rational re{0};
  Rational im{0};

  GaussRational() = default;
  GaussRational(Rational r, Rational i = Rational(0)) : re(std::move(r)), im(std::move(i)) {}
  GaussRational(long long r) : re(r) {}

  bool is_zero() const { return re == 0 && im == 0; }
  GaussRational conj() const { return {re, -im}; }
  Rational norm_squared() const { return re * re + im * im; }

  friend GaussRational operator+(const GaussRational& a, const GaussRational& b) { return {a.re + b.re, a.im + b.im}; }
  friend GaussRational operator-(const GaussRational& a, const GaussRational& b) { return {a.re - b.re, a.im - b.im}; }
  friend GaussRational operator-(const GaussRational& a) { return {-a.re, -a.im}; }
  friend GaussRational operator*(const GaussRational& a, const GaussRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend bool operator==(const GaussRational& a, const GaussRational& b) { return a.re == b.re && a.im == b.im; }

  std::string to_string() const {
    std::ostringstream os;
    if (im == 0) {
      os << re;
    } else if (re == 0) {
      os << im << "i";
    } else {
      os << "(" << re << (im < 0 ? "-" : "+") << (im < 0 ? Rational(-im) : im) << "i)";
    }
    return os.str();
  }
};

using Index = std::int64_t;

/// Finitely supported vector; zero coefficients are never stored.
class FinVec {
 public:
  FinVec() = default;

  static FinVec basis(Index n) {
    FinVec v;
    v.coeffs_.emplace(n, GaussRational(1));
    return v;
  }

  const std::map<Index, GaussRational>& support() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }

  GaussRational at(Index n) const {
    const auto it = coeffs_.find(n);
    return it == coeffs_.end() ? GaussRational() : it->second;
  }

  void add(Index n, const GaussRational& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = coeffs_.try_emplace(n, c);
    if (!fresh) {
      it->second = it->second + c;
      if (it->second.is_zero()) coeffs_.erase(it);
    }
  }

  friend FinVec operator+(FinVec a, const FinVec& b) {
    for (const auto& [n, c] : b.coeffs_) a.add(n, c);
    return a;
  }
  friend FinVec operator-(FinVec a, const FinVec& b) {
    for (const auto& [n, c] : b.coeffs_) a.add(n, -c);
    return a;
  }
  friend FinVec operator*(const GaussRational& s, const FinVec& v) {
    FinVec out;
    if (s.is_zero()) return out;
    for (const auto& [n, c] : v.coeffs_) out.coeffs_.emplace(n, s * c);
    return out;
  }
  friend bool operator==(const FinVec& a, const FinVec& b) { return a.coeffs_ == b.coeffs_; }

  /// <u, v>, conjugate-linear in u.
  friend GaussRational inner(const FinVec& u, const FinVec& v) {
    GaussRational acc;
    for (const auto& [n, c] : u.coeffs_) {
      const auto it = v.coeffs_.find(n);
      if (it != v.coeffs_.end()) acc = acc + c.conj() * it->second;
    }
    return acc;
  }

  Rational norm_squared() const {
    Rational acc = 0;
    for (const auto& [n, c] : coeffs_) acc += c.norm_squared();
    return acc;
  }

  Index max_abs_index() const {
    Index r = 0;
    for (const auto& [n, c] : coeffs_) r = std::max(r, n < 0 ? -n : n);
    return r;
  }

  std::string to_string() const {
    if (coeffs_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [n, c] : coeffs_) {
      if (!first) os << " + ";
      first = false;
      if (!(c == GaussRational(1))) os << c.to_string() << "*";
      os << "e_" << n;
    }
    return os.str();
  }

 private:
  std::map<Index, GaussRational> coeffs_;
};

enum class Generator { B, Binv, J, P, Id };

/// Immutable expression tree over the generators.
class ShiftOp {
 public:
  struct Node;

  static ShiftOp gen(Generator g);
  static ShiftOp B() { return gen(Generator::B); }
  static ShiftOp Binv() { return gen(Generator::Binv); }
  static ShiftOp J() { return gen(Generator::J); }
  static ShiftOp P() { return gen(Generator::P); }
  static ShiftOp Id() { return gen(Generator::Id); }
  static ShiftOp Pperp();

  const Node& node() const { return *node_; }

  friend ShiftOp operator+(const ShiftOp& x, const ShiftOp& y);
  friend ShiftOp operator-(const ShiftOp& x, const ShiftOp& y);
  friend ShiftOp operator*(const ShiftOp& x, const ShiftOp& y);
  friend ShiftOp operator*(const GaussRational& c, const ShiftOp& x);

  /// Structural adjoint: B* = B^-1, J* = J, P* = P, (XY)* = Y*X*,
  /// (X+Y)* = X*+Y*, (cX)* = conj(c) X*.
  ShiftOp adjoint() const;

  FinVec apply(const FinVec& v) const;
  FinVec operator()(const FinVec& v) const { return apply(v); }

  /// Bound R(r) such that vectors supported in [-r, r] are mapped into
  /// [-R(r), R(r)]. B and B^-1 widen the radius by one; J, P, Id keep it.
  Index support_radius(Index r) const;

  /// Number of generator factors along the longest product chain.
  int depth() const;

  std::string to_string() const;

 private:
  explicit ShiftOp(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  template <class T>
  static ShiftOp make(T value);

  static FinVec apply_generator(Generator g, const FinVec& v) {
    FinVec out;
    for (const auto& [n, c] : v.support()) {
      switch (g) {
        case Generator::B: out.add(n + 1, c); break;
        case Generator::Binv: out.add(n - 1, c); break;
        case Generator::J: out.add(-n, c); break;
        case Generator::P:
          if (n >= 0) out.add(n, c);
          break;
        case Generator::Id: out.add(n, c); break;
      }
    }
    return out;
  }

  std::shared_ptr<const Node> node_;
};

namespace node {
struct Gen {
  Generator g;
};
struct Scale {
  GaussRational c;
  ShiftOp x;
};
struct Sum {
  ShiftOp x, y;
};
struct Compose {  // x after y
  ShiftOp x, y;
};
}  // namespace node

struct ShiftOp::Node {
  std::variant<node::Gen, node::Scale, node::Sum, node::Compose> v;
};

template <class T>
ShiftOp ShiftOp::make(T value) {
  return ShiftOp(std::make_shared<const Node>(Node{std::move(value)}));
}

inline ShiftOp ShiftOp::gen(Generator g) { return make(node::Gen{g}); }
inline ShiftOp ShiftOp::Pperp() { return Id() - P(); }

inline ShiftOp operator+(const ShiftOp& x, const ShiftOp& y) { return ShiftOp::make(node::Sum{x, y}); }
inline ShiftOp operator-(const ShiftOp& x, const ShiftOp& y) { return ShiftOp::make(node::Sum{x, GaussRational(-1) * y}); }
inline ShiftOp operator*(const ShiftOp& x, const ShiftOp& y) { return ShiftOp::make(node::Compose{x, y}); }
inline ShiftOp operator*(const GaussRational& c, const ShiftOp& x) { return ShiftOp::make(node::Scale{c, x}); }

inline ShiftOp ShiftOp::adjoint() const {
  return std::visit(
      [](const auto& n) -> ShiftOp {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Gen>) {
          switch (n.g) {
            case Generator::B: return Binv();
            case Generator::Binv: return B();
            default: return gen(n.g);
          }
        } else if constexpr (std::is_same_v<T, node::Scale>) {
          return n.c.conj() * n.x.adjoint();
        } else if constexpr (std::is_same_v<T, node::Sum>) {
          return n.x.adjoint() + n.y.adjoint();
        } else {
          return n.y.adjoint() * n.x.adjoint();
        }
      },
      node_->v);
}

inline FinVec ShiftOp::apply(const FinVec& v) const {
  return std::visit(
      [&v](const auto& n) -> FinVec {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Gen>) {
          return apply_generator(n.g, v);
        } else if constexpr (std::is_same_v<T, node::Scale>) {
          return n.c * n.x.apply(v);
        } else if constexpr (std::is_same_v<T, node::Sum>) {
          return n.x.apply(v) + n.y.apply(v);
        } else {
          return n.x.apply(n.y.apply(v));
        }
      },
      node_->v);
}

inline Index ShiftOp::support_radius(Index r) const {
  return std::visit(
      [r](const auto& n) -> Index {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Gen>) {
          return (n.g == Generator::B || n.g == Generator::Binv) ? r + 1 : r;
        } else if constexpr (std::is_same_v<T, node::Scale>) {
          return n.x.support_radius(r);
        } else if constexpr (std::is_same_v<T, node::Sum>) {
          return std::max(n.x.support_radius(r), n.y.support_radius(r));
        } else {
          return n.x.support_radius(n.y.support_radius(r));
        }
      },
      node_->v);
}

inline int ShiftOp::depth() const {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Gen>) return 1;
        else if constexpr (std::is_same_v<T, node::Scale>) return n.x.depth();
        else if constexpr (std::is_same_v<T, node::Sum>) return std::max(n.x.depth(), n.y.depth());
        else return n.x.depth() + n.y.depth();
      },
      node_->v);
}

inline std::string ShiftOp::to_string() const {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, node::Gen>) {
          switch (n.g) {
            case Generator::B: return "B";
            case Generator::Binv: return "B'";
            case Generator::J: return "J";
            case Generator::P: return "P";
            default: return "I";
          }
        } else if constexpr (std::is_same_v<T, node::Scale>) {
          return n.c.to_string() + "*" + n.x.to_string();
        } else if constexpr (std::is_same_v<T, node::Sum>) {
          return "(" + n.x.to_string() + " + " + n.y.to_string() + ")";
        } else {
          return n.x.to_string() + n.y.to_string();
        }
      },
      node_->v);
}

/// Pair of vectors, an element of l^2(Z) (+) l^2(Z).
using FinPair = std::pair<FinVec, FinVec>;

/// 2 x 2 matrix over the operator algebra.
class BlockOp {
 public:
  BlockOp(ShiftOp a00, ShiftOp a01, ShiftOp a10, ShiftOp a11) : e_{{{a00, a01}, {a10, a11}}} {}

  static BlockOp diag(ShiftOp a, ShiftOp b) {
    const ShiftOp zero = GaussRational(0) * ShiftOp::Id();
    return BlockOp(std::move(a), zero, zero, std::move(b));
  }

  const ShiftOp& at(int r, int c) const { return e_[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]; }

  FinPair apply(const FinPair& v) const {
    return {at(0, 0)(v.first) + at(0, 1)(v.second), at(1, 0)(v.first) + at(1, 1)(v.second)};
  }

  BlockOp adjoint() const {
    return BlockOp(at(0, 0).adjoint(), at(1, 0).adjoint(), at(0, 1).adjoint(), at(1, 1).adjoint());
  }

  friend BlockOp operator*(const BlockOp& x, const BlockOp& y) {
    auto entry = [&](int r, int c) { return x.at(r, 0) * y.at(0, c) + x.at(r, 1) * y.at(1, c); };
    return BlockOp(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1));
  }

  Index support_radius(Index r) const {
    Index out = 0;
    for (const auto& row : e_)
      for (const auto& x : row) out = std::max(out, x.support_radius(r));
    return out;
  }

 private:
  std::array<std::array<ShiftOp, 2>, 2> e_;
};

// ---------------------------------------------------------------------------
// Expression grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary ('*' unary)*
//   unary   := '-' unary | postfix
//   postfix := primary '^'*            (postfix ^ is the adjoint)
//   primary := B | B' | J | P | I | scalar | '(' expr ')'
//   scalar  := digits ['.' digits] ['/' digits] ['i'] | 'i'

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string text) : s_(std::move(text)) {}

  ShiftOp parse() {
    ShiftOp op = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return op;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "operator expression: " << msg << " at column " << pos_ + 1 << " in \"" << s_ << "\"";
    throw MalformedInput(os.str());
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ShiftOp expr() {
    ShiftOp acc = term();
    for (;;) {
      if (eat('+')) acc = acc + term();
      else if (eat('-')) acc = acc - term();
      else return acc;
    }
  }
  ShiftOp term() {
    ShiftOp acc = unary();
    while (eat('*')) acc = acc * unary();
    return acc;
  }
  ShiftOp unary() {
    if (eat('-')) return GaussRational(-1) * unary();
    return postfix();
  }
  ShiftOp postfix() {
    ShiftOp op = primary();
    while (eat('^')) op = op.adjoint();
    return op;
  }
  Integer digits() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected digits");
    return Integer(s_.substr(start, pos_ - start));
  }
  ShiftOp primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      ShiftOp inside = expr();
      if (!eat(')')) fail("expected ')'");
      return inside;
    }
    if (c == 'B') {
      ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '\'') {
        ++pos_;
        return ShiftOp::Binv();
      }
      return ShiftOp::B();
    }
    if (c == 'J') return ++pos_, ShiftOp::J();
    if (c == 'P') return ++pos_, ShiftOp::P();
    if (c == 'I') return ++pos_, ShiftOp::Id();
    if (c == 'i') return ++pos_, GaussRational(0, 1) * ShiftOp::Id();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      Rational value(digits());
      if (pos_ < s_.size() && s_[pos_] == '.') {
        ++pos_;
        const std::size_t start = pos_;
        const Integer frac = digits();
        Integer scale = 1;
        for (std::size_t k = start; k < pos_; ++k) scale *= 10;
        value += Rational(frac, scale);
      }
      if (pos_ < s_.size() && s_[pos_] == '/') {
        ++pos_;
        const Integer den = digits();
        if (den == 0) fail("division by zero in scalar literal");
        value /= Rational(den);
      }
      if (pos_ < s_.size() && s_[pos_] == 'i') {
        ++pos_;
        return GaussRational(0, value) * ShiftOp::Id();
      }
      return GaussRational(value) * ShiftOp::Id();
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
};

inline ShiftOp parse_expression(const std::string& text) { return ExpressionParser(text).parse(); }

// ---------------------------------------------------------------------------
// Reports

struct CheckEntry {
  std::string check;
  Index index = 0;
  std::string expected;
  std::string got;
  bool pass = true;
};

struct Report {
  std::string name;
  Index window = 0;
  std::vector<CheckEntry> entries;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.pass; }));
  }
  bool passed() const { return failures() == 0; }

  void record(std::string check, Index index, const FinVec& expected, const FinVec& got) {
    entries.push_back({std::move(check), index, expected.to_string(), got.to_string(), expected == got});
  }
  void record(std::string check, Index index, const GaussRational& expected, const GaussRational& got) {
    entries.push_back({std::move(check), index, expected.to_string(), got.to_string(), expected == got});
  }
  void record_bool(std::string check, Index index, bool ok, std::string detail = {}) {
    entries.push_back({std::move(check), index, "true", ok ? "true" : "false: " + detail, ok});
  }

  /// Support of op(e_n) must lie inside the structural radius bound.
  void record_support(const std::string& check, Index n, const FinVec& image, Index bound) {
    const bool ok = image.max_abs_index() <= bound;
    if (!ok) record_bool(check + "/support-bound", n, false, "support exceeds radius " + std::to_string(bound));
  }
};

inline Json report_to_json(const Report& r, bool failures_only = false) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    if (failures_only && e.pass) continue;
    entries.push_back({{"check", e.check}, {"index", e.index}, {"expected", e.expected}, {"got", e.got}, {"pass", e.pass}});
  }
  return Json{{"name", r.name},
              {"window", r.window},
              {"checks", r.entries.size()},
              {"failures", r.failures()},
              {"pass", r.passed()},
              {"entries", std::move(entries)}};
}

inline void require_window(Index window, Index minimum, const char* where) {
  if (window < minimum) {
    std::ostringstream os;
    os << where << ": window must be >= " << minimum;
    throw MalformedInput(os.str());
  }
}

/// Images op(e_n) for |n| <= window.
inline std::map<Index, FinVec> images(const ShiftOp& op, Index window) {
  std::map<Index, FinVec> out;
  for (Index n = -window; n <= window; ++n) out.emplace(n, op(FinVec::basis(n)));
  return out;
}

/// <op* e_m, e_n> = <e_m, op e_n> for all |m|, |n| <= window.
inline Report verify_adjoint(const ShiftOp& op, Index window) {
  Report r{"adjoint:" + op.to_string(), window, {}};
  const auto fwd = images(op, window);
  const auto adj = images(op.adjoint(), window);
  for (Index m = -window; m <= window; ++m) {
    for (Index n = -window; n <= window; ++n) {
      const GaussRational lhs = adj.at(m).at(n).conj();
      const GaussRational rhs = fwd.at(n).at(m);
      if (!(lhs == rhs)) r.record("adjoint pairing m=" + std::to_string(m), n, rhs, lhs);
    }
  }
  if (r.entries.empty()) r.record_bool("adjoint pairing", 0, true);
  return r;
}

/// J^2 = I, B B^-1 = I, B^-1 B = I, P^2 = P on the window.
inline Report verify_generator_relations(Index window) {
  require_window(window, 1, "verify_generator_relations");
  Report r{"generator-relations", window, {}};
  const ShiftOp J = ShiftOp::J(), B = ShiftOp::B(), Bi = ShiftOp::Binv(), P = ShiftOp::P();
  for (Index n = -window; n <= window; ++n) {
    const FinVec e = FinVec::basis(n);
    r.record("J^2 = I", n, e, (J * J)(e));
    r.record("B B' = I", n, e, (B * Bi)(e));
    r.record("B' B = I", n, e, (Bi * B)(e));
    r.record("P^2 = P", n, P(e), (P * P)(e));
  }
  return r;
}

struct ShiftExampleOps {
  ShiftOp S = ShiftOp::J() * ShiftOp::B() * ShiftOp::P();
  ShiftOp T = ShiftOp::B() * ShiftOp::P() * ShiftOp::J();
  ShiftOp R = S + T;
  ShiftOp V = ShiftOp::Binv();
  ShiftOp W = ShiftOp::B();
};

/// With S = JBP, T = BPJ, R = S + T, V = B^-1, W = B: R*R e_n = e_n for n != 0
/// and 2 e_0 for n = 0, R* e_0 = 0, S* = V T W, and S, T partial isometries.
inline Report verify_example_61(Index window) {
  require_window(window, 4, "verify_example_61");
  const ShiftExampleOps ops;
  Report r{"shift-example", window, {}};
  const ShiftOp RsR = ops.R.adjoint() * ops.R;
  const ShiftOp Ss = ops.S.adjoint();
  const ShiftOp VTW = ops.V * ops.T * ops.W;
  const ShiftOp SsS = ops.S.adjoint() * ops.S;
  const ShiftOp TsT = ops.T.adjoint() * ops.T;
  for (Index n = -window; n <= window; ++n) {
    const FinVec e = FinVec::basis(n);
    const FinVec rr = RsR(e);
    r.record_support("R*R", n, rr, RsR.support_radius(n < 0 ? -n : n));
    r.record("R*R e_n", n, (n == 0 ? GaussRational(2) : GaussRational(1)) * e, rr);
    const FinVec lhs = Ss(e), rhs = VTW(e);
    r.record_support("S*", n, lhs, Ss.support_radius(n < 0 ? -n : n));
    r.record_support("VTW", n, rhs, VTW.support_radius(n < 0 ? -n : n));
    r.record("S* e_n = VTW e_n", n, rhs, lhs);
    const FinVec s1 = SsS(e), t1 = TsT(e);
    r.record("S*S idempotent", n, s1, SsS(s1));
    r.record("T*T idempotent", n, t1, TsT(t1));
    r.record("S S*S = S", n, ops.S(e), ops.S(s1));
    r.record("T T*T = T", n, ops.T(e), ops.T(t1));
  }
  r.record("R* e_0 = 0", 0, FinVec(), ops.R.adjoint()(FinVec::basis(0)));
  r.record("R*R e_0 coefficient", 0, GaussRational(2), RsR(FinVec::basis(0)).at(0));
  return r;
}

/// Checks that X is idempotent and self-adjoint on the window.
inline void record_projection(Report& r, const std::string& name, const ShiftOp& x, Index window) {
  const auto img = images(x, window);
  for (Index n = -window; n <= window; ++n) {
    r.record(name + " idempotent", n, img.at(n), x(img.at(n)));
    bool symmetric = true;
    for (Index m = -window; m <= window && symmetric; ++m)
      symmetric = img.at(n).at(m) == img.at(m).at(n).conj();
    r.record_bool(name + " self-adjoint", n, symmetric, "matrix entry mismatch in column " + std::to_string(n));
  }
}

/// The unitary U = diag(V, 1) [[T, (1-TT*)^{1/2}], [-(1-T*T)^{1/2}, T*]] diag(W, 1).
/// The square roots are replaced by the projections themselves once T*T = JPJ
/// and TT* = B P B^-1 are verified to be projections.
inline BlockOp example_block_unitary() {
  const ShiftExampleOps ops;
  const ShiftOp I = ShiftOp::Id();
  const ShiftOp defect_out = I - ops.T * ops.T.adjoint();  // (1 - TT*)^{1/2}
  const ShiftOp defect_in = I - ops.T.adjoint() * ops.T;   // (1 - T*T)^{1/2}
  const BlockOp middle(ops.T, defect_out, GaussRational(-1) * defect_in, ops.T.adjoint());
  return BlockOp::diag(ops.V, I) * middle * BlockOp::diag(ops.W, I);
}

inline Report verify_block_unitary(Index window) {
  require_window(window, 4, "verify_block_unitary");
  const ShiftExampleOps ops;
  Report r{"block-unitary", window, {}};
  const ShiftOp TsT = ops.T.adjoint() * ops.T;
  const ShiftOp TTs = ops.T * ops.T.adjoint();
  const ShiftOp JPJ = ShiftOp::J() * ShiftOp::P() * ShiftOp::J();
  const ShiftOp BPBi = ShiftOp::B() * ShiftOp::P() * ShiftOp::Binv();
  for (Index n = -window; n <= window; ++n) {
    const FinVec e = FinVec::basis(n);
    r.record("T*T = JPJ", n, JPJ(e), TsT(e));
    r.record("TT* = BPB'", n, BPBi(e), TTs(e));
  }
  record_projection(r, "T*T", TsT, window);
  record_projection(r, "TT*", TTs, window);
  record_projection(r, "1-T*T", ShiftOp::Id() - TsT, window);
  record_projection(r, "1-TT*", ShiftOp::Id() - TTs, window);
  const BlockOp U = example_block_unitary();
  const BlockOp UsU = U.adjoint() * U;
  const BlockOp UUs = U * U.adjoint();
  auto record_pair = [&r](const std::string& name, Index n, const FinPair& want, const FinPair& got) {
    r.record(name + " (first)", n, want.first, got.first);
    r.record(name + " (second)", n, want.second, got.second);
  };
  for (Index n = -window; n <= window; ++n) {
    const FinPair top{FinVec::basis(n), FinVec()};
    const FinPair bottom{FinVec(), FinVec::basis(n)};
    record_pair("U*U (e_n, 0)", n, top, UsU.apply(top));
    record_pair("U*U (0, e_n)", n, bottom, UsU.apply(bottom));
    record_pair("UU* (e_n, 0)", n, top, UUs.apply(top));
    record_pair("UU* (0, e_n)", n, bottom, UUs.apply(bottom));
  }
  return r;
}

struct GammaWitness {
  bool vanishing = true;
  Rational lower_bound_squared = 0;  // max_n ||P-perp op P e_n||^2 over the window
  Index witness_index = 0;
  FinVec witness_image;

  /// sqrt(lower_bound_squared) when it is a rational square.
  std::optional<Rational> lower_bound_exact() const {
    const Integer num = boost::multiprecision::numerator(lower_bound_squared);
    const Integer den = boost::multiprecision::denominator(lower_bound_squared);
    const Integer rn = boost::multiprecision::sqrt(num), rd = boost::multiprecision::sqrt(den);
    if (rn * rn != num || rd * rd != den) return std::nullopt;
    return Rational(rn, rd);
  }
  double lower_bound() const { return std::sqrt(lower_bound_squared.convert_to<double>()); }
};

/// Evaluates gamma(op) = P-perp op P on e_n, |n| <= window: exact lower bound
/// for ||gamma(op)|| from the best basis witness, and whether it vanishes.
inline GammaWitness gamma_seminorm_witness(const ShiftOp& op, Index window) {
  require_window(window, 2, "gamma_seminorm_witness");
  const ShiftOp gamma = ShiftOp::Pperp() * op * ShiftOp::P();
  GammaWitness w;
  for (Index n = -window; n <= window; ++n) {
    const FinVec img = gamma(FinVec::basis(n));
    if (img.is_zero()) continue;
    w.vanishing = false;
    const Rational sq = img.norm_squared();
    if (sq > w.lower_bound_squared) {
      w.lower_bound_squared = sq;
      w.witness_index = n;
      w.witness_image = img;
    }
  }
  return w;
}

/// [P, op] = P op P-perp - P-perp op P on the window, with the two terms having
/// ranges in P and P-perp respectively and vanishing on P-perp and P respectively.
inline Report ls_commutator_identity(const ShiftOp& op, Index window) {
  require_window(window, 2, "ls_commutator_identity");
  const ShiftOp P = ShiftOp::P(), Pp = ShiftOp::Pperp();
  const ShiftOp comm = P * op - op * P;
  const ShiftOp upper = P * op * Pp;
  const ShiftOp lower = Pp * op * P;
  Report r{"ls-commutator:" + op.to_string(), window, {}};
  for (Index n = -window; n <= window; ++n) {
    const FinVec e = FinVec::basis(n);
    const FinVec u = upper(e), l = lower(e);
    r.record("[P,op] = P op P' - P' op P", n, u - l, comm(e));
    r.record("P op P' has range in P", n, u, P(u));
    r.record("P' op P has range in P'", n, l, Pp(l));
    if (n >= 0) r.record("P op P' vanishes on P", n, FinVec(), u);
    else r.record("P' op P vanishes on P'", n, FinVec(), l);
  }
  return r;
}

}  // namespace leiblab::shiftlab
