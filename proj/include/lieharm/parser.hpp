#pragma once

// Recursive-descent parser for system files:
//
//   group T^2xS3^1
//   P1 = dx1 + i*d0_1 + 1/3     # comment
//
// Literals: 3, 2.5, 1e-3, 1/3, 2.5i, i, (1+2i), (0.5-1i), pi, sqrt(m),
// liouville(B). Terminating decimals and a/b are exact.

#include <cctype>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lieharm/opalg.hpp"

namespace lieharm {

class ParseError : public InputError {
 public:
  ParseError(const std::string& msg, int line, int col)
      : InputError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int column() const { return col_; }

 private:
  int line_, col_;
};

namespace detail {

struct Token {
  enum class T { Num, Ident, Punct, End } type = T::End;
  std::string text;
  Scalar value;  // Num: parsed literal (imaginary unit already applied)
  bool imag = false;
  std::size_t begin = 0, end = 0;
};

// Exact decimal parse: mantissa digits scaled by a power of ten; falls back
// to double when int64 overflows.
inline Scalar decimal_literal(const std::string& s) {
  try {
    std::size_t i = 0;
    __int128 mant = 0;
    int scale = 0;
    bool frac = false;
    for (; i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'); ++i) {
      if (s[i] == '.') {
        frac = true;
        continue;
      }
      mant = mant * 10 + (s[i] - '0');
      if (mant > INT64_MAX) throw ExactOverflow();
      if (frac) --scale;
    }
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) scale += std::stoi(s.substr(i + 1));
    if (scale > 18 || scale < -18) throw ExactOverflow();
    Rational r(static_cast<std::int64_t>(mant));
    std::int64_t p = 1;
    for (int k = 0; k < (scale < 0 ? -scale : scale); ++k) p *= 10;
    r = scale < 0 ? r / Rational(p) : r * Rational(p);
    return Scalar::exact(GaussRational(r));
  } catch (const ExactOverflow&) {
    return Scalar::from_float(std::stod(s));
  }
}

class Lexer {
 public:
  Lexer(const std::string& src, int line, std::size_t col0 = 0) : src_(src), line_(line), col0_(col0) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src_.size()) {
      const char c = src_[i];
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      Token t;
      t.begin = i;
      if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src_.size() &&
                                                          std::isdigit(static_cast<unsigned char>(src_[i + 1])))) {
        i = number(i, t);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_')) ++j;
        t.type = Token::T::Ident;
        t.text = src_.substr(i, j - i);
        i = j;
      } else if (std::string("()+-*^=").find(c) != std::string::npos) {
        t.type = Token::T::Punct;
        t.text = std::string(1, c);
        ++i;
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col(i));
      }
      t.end = i;
      out.push_back(std::move(t));
    }
    Token end;
    end.begin = end.end = i;
    out.push_back(end);
    return out;
  }

 private:
  std::size_t number(std::size_t i, Token& t) {
    static const std::regex num_re(R"(^(\d+/\d+|\d*\.?\d+(?:[eE][+-]?\d+)?|\d+\.))");
    std::smatch m;
    const std::string rest = src_.substr(i);
    if (!std::regex_search(rest, m, num_re)) throw ParseError("bad number", line_, col(i));
    const std::string lit = m.str(1);
    t.type = Token::T::Num;
    t.text = lit;
    const auto slash = lit.find('/');
    if (slash != std::string::npos) {
      try {
        const std::int64_t d = std::stoll(lit.substr(slash + 1));
        if (d == 0) throw ParseError("zero denominator", line_, col(i));
        t.value = Scalar::exact(GaussRational(Rational(std::stoll(lit.substr(0, slash)), d)));
      } catch (const std::out_of_range&) {
        throw ParseError("rational literal out of range", line_, col(i));
      }
    } else {
      t.value = decimal_literal(lit);
    }
    std::size_t j = i + lit.size();
    // Imaginary suffix: `2i` but not `2in...`.
    if (j < src_.size() && src_[j] == 'i' &&
        (j + 1 >= src_.size() || !(std::isalnum(static_cast<unsigned char>(src_[j + 1])) || src_[j + 1] == '_'))) {
      t.imag = true;
      const auto v = t.value.kind() == Scalar::Kind::Exact
                         ? Scalar::exact(t.value.rational() * GaussRational(Rational(0), Rational(1)))
                         : Scalar::from_float(t.value.value() * std::complex<double>(0, 1));
      t.value = v;
      t.text += "i";
      ++j;
    }
    return j;
  }

  int col(std::size_t i) const { return static_cast<int>(col0_ + i) + 1; }

  const std::string& src_;
  int line_;
  std::size_t col0_;
};

class ExprParser {
 public:
  ExprParser(std::vector<Token> toks, const GroupSpec& g, int line, std::size_t col0)
      : toks_(std::move(toks)), group_(g), line_(line), col0_(col0) {}

  OperatorExpr parse_all() {
    OperatorExpr e = expr();
    if (peek().type != Token::T::End) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool is_punct(const char* p, std::size_t k = 0) const {
    return peek(k).type == Token::T::Punct && peek(k).text == p;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, static_cast<int>(col0_ + peek().begin) + 1);
  }
  void expect(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    ++pos_;
  }

  static OperatorExpr negate(OperatorExpr e) {
    if (e.kind == OperatorExpr::Kind::Scalar)
      if (auto n = e.scalar.negated()) return OperatorExpr::make_scalar(*n);
    return OperatorExpr::make_prod({OperatorExpr::make_scalar(GaussRational(-1)), std::move(e)});
  }

  OperatorExpr expr() {
    std::vector<OperatorExpr> terms;
    bool neg = false;
    if (is_punct("-")) {
      neg = true;
      ++pos_;
    }
    terms.push_back(neg ? negate(term()) : term());
    while (is_punct("+") || is_punct("-")) {
      const bool minus = is_punct("-");
      ++pos_;
      terms.push_back(minus ? negate(term()) : term());
    }
    return terms.size() == 1 ? std::move(terms[0]) : OperatorExpr::make_sum(std::move(terms));
  }

  OperatorExpr term() {
    std::vector<OperatorExpr> fs;
    fs.push_back(factor());
    while (is_punct("*")) {
      ++pos_;
      fs.push_back(factor());
    }
    return fs.size() == 1 ? std::move(fs[0]) : OperatorExpr::make_prod(std::move(fs));
  }

  OperatorExpr factor() {
    OperatorExpr a = atom();
    if (is_punct("^")) {
      ++pos_;
      const Token& t = peek();
      if (t.type != Token::T::Num || t.imag || t.text.find_first_not_of("0123456789") != std::string::npos)
        fail("exponent must be a nonnegative integer");
      const int e = std::stoi(t.text);
      ++pos_;
      return OperatorExpr::make_pow(std::move(a), e);
    }
    return a;
  }

  // `(` [-] NUM (+|-) IMAG `)` with no whitespace between tokens.
  std::optional<OperatorExpr> complex_literal() {
    std::size_t k = 0;
    const std::size_t start = pos_;
    auto adjacent = [&](std::size_t a) { return peek(a).end == peek(a + 1).begin; };
    if (!is_punct("(")) return std::nullopt;
    if (!adjacent(k)) return std::nullopt;
    ++k;
    bool neg_re = false;
    if (is_punct("-", k)) {
      if (!adjacent(k)) return std::nullopt;
      neg_re = true;
      ++k;
    }
    if (peek(k).type != Token::T::Num || peek(k).imag || !adjacent(k)) return std::nullopt;
    const Scalar re = peek(k).value;
    ++k;
    if (!(is_punct("+", k) || is_punct("-", k)) || !adjacent(k)) return std::nullopt;
    const bool neg_im = is_punct("-", k);
    ++k;
    Scalar im;
    if (peek(k).type == Token::T::Num && peek(k).imag) {
      im = peek(k).value;
    } else if (peek(k).type == Token::T::Ident && peek(k).text == "i") {
      im = Scalar::exact(GaussRational(Rational(0), Rational(1)));
    } else {
      return std::nullopt;
    }
    if (!adjacent(k)) return std::nullopt;
    ++k;
    if (!is_punct(")", k)) return std::nullopt;
    pos_ = start + k + 1;
    if (re.kind() == Scalar::Kind::Exact && im.kind() == Scalar::Kind::Exact) {
      GaussRational v = neg_re ? -re.rational() : re.rational();
      v += neg_im ? -im.rational() : im.rational();
      return OperatorExpr::make_scalar(Scalar::exact(v));
    }
    std::complex<double> v = neg_re ? -re.value() : re.value();
    v += neg_im ? -im.value() : im.value();
    return OperatorExpr::make_scalar(Scalar::from_float(v));
  }

  std::int64_t paren_uint(const std::string& fn) {
    expect("(");
    const Token& t = peek();
    if (t.type != Token::T::Num || t.imag || t.text.find_first_not_of("0123456789") != std::string::npos)
      fail(fn + " expects a positive integer");
    std::int64_t v = 0;
    try {
      v = std::stoll(t.text);
    } catch (const std::out_of_range&) {
      fail(fn + " argument out of range");
    }
    ++pos_;
    expect(")");
    return v;
  }

  OperatorExpr atom() {
    const Token& t = peek();
    if (t.type == Token::T::Num) {
      ++pos_;
      return OperatorExpr::make_scalar(t.value);
    }
    if (t.type == Token::T::Punct && t.text == "(") {
      if (auto lit = complex_literal()) return *lit;
      ++pos_;
      OperatorExpr e = expr();
      expect(")");
      return e;
    }
    if (t.type == Token::T::Ident) {
      const std::string id = t.text;
      const Token at = t;
      ++pos_;
      if (id == "i") return OperatorExpr::make_scalar(Scalar::exact(GaussRational(Rational(0), Rational(1))));
      if (id == "pi") return OperatorExpr::make_scalar(Scalar::pi());
      if (id == "sqrt") {
        const auto m = paren_uint("sqrt");
        if (m < 1) fail("sqrt expects a positive integer");
        return OperatorExpr::make_scalar(Scalar::sqrt_of(m));
      }
      if (id == "liouville") {
        const auto b = paren_uint("liouville");
        if (b < 2) fail("liouville base must be >= 2");
        return OperatorExpr::make_scalar(Scalar::liouville(b));
      }
      static const std::regex gen_re(R"(^(dx|d0_|dplus_|dminus_|D1_|D2_|D3_)(\d+)$)");
      std::smatch m;
      if (!std::regex_match(id, m, gen_re))
        throw ParseError("unknown generator '" + id + "'", line_, static_cast<int>(col0_ + at.begin) + 1);
      const std::string head = m.str(1);
      const GenKind kind = head == "dx"       ? GenKind::Dx
                           : head == "d0_"    ? GenKind::D0
                           : head == "dplus_" ? GenKind::Dplus
                           : head == "dminus_" ? GenKind::Dminus
                           : head == "D1_"    ? GenKind::D1
                           : head == "D2_"    ? GenKind::D2
                                              : GenKind::D3;
      const int idx = m.str(2).size() > 6 ? 1 << 30 : std::stoi(m.str(2));
      const int lim = kind == GenKind::Dx ? group_.torus_rank : group_.sphere_count;
      if (idx < 1 || idx > lim)
        throw ParseError("factor index out of range in '" + id + "' for group " + group_.str(), line_,
                         static_cast<int>(col0_ + at.begin) + 1);
      return OperatorExpr::make_gen(kind, idx);
    }
    if (t.type == Token::T::End) fail("unexpected end of line");
    fail("unexpected '" + t.text + "'");
  }

  std::vector<Token> toks_;
  GroupSpec group_;
  int line_;
  std::size_t col0_;
  std::size_t pos_ = 0;
};

inline std::string strip_comment(const std::string& s) {
  const auto h = s.find('#');
  return h == std::string::npos ? s : s.substr(0, h);
}

inline bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

// Parses one expression against a group (used by tests and the CLI).
inline OperatorExpr parse_expr(const std::string& text, const GroupSpec& g, int line = 1) {
  detail::Lexer lex(text, line);
  return detail::ExprParser(lex.run(), g, line, 0).parse_all();
}

inline SystemDef parse_system(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  SystemDef sys;
  bool have_group = false;
  std::set<std::string> names;
  static const std::regex ident_re(R"(^[A-Za-z_][A-Za-z0-9_]*$)");
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = detail::strip_comment(raw);
    if (detail::blank(s)) continue;
    const auto first = s.find_first_not_of(" \t");
    if (!have_group) {
      if (s.compare(first, 5, "group") != 0)
        throw ParseError("expected 'group' declaration", line, static_cast<int>(first) + 1);
      try {
        sys.group = GroupSpec::parse(s.substr(first + 5));
      } catch (const Error& e) {
        throw ParseError(e.what(), line, static_cast<int>(first) + 7);
      }
      have_group = true;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'NAME = expr'", line, static_cast<int>(first) + 1);
    std::string name = s.substr(first, eq - first);
    name.erase(name.find_last_not_of(" \t") + 1);
    if (!std::regex_match(name, ident_re)) throw ParseError("bad operator name '" + name + "'", line, static_cast<int>(first) + 1);
    if (!names.insert(name).second) throw ParseError("duplicate operator name '" + name + "'", line, static_cast<int>(first) + 1);
    const std::string rhs = s.substr(eq + 1);
    detail::Lexer lex(rhs, line, eq + 1);
    auto toks = lex.run();
    OperatorExpr e = detail::ExprParser(std::move(toks), sys.group, line, eq + 1).parse_all();
    sys.ops.push_back({name, std::move(e)});
  }
  if (!have_group) throw ParseError("missing 'group' declaration", line + 1, 1);
  if (sys.ops.empty()) throw ParseError("system defines no operators", line + 1, 1);
  return sys;
}

}  // namespace lieharm
