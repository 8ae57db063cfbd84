#include "blendplan/rational.hpp"

#include "blendplan/errors.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace blendplan {

namespace {

BigInt pow10(int n) {
  BigInt v = 1;
  for (int i = 0; i < n; ++i) v *= 10;
  return v;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool all_digits(const std::string& s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

// Exact decimal/scientific literal -> rational.
Rational parse_decimal(const std::string& text) {
  std::string s = text;
  bool negative = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    negative = s[0] == '-';
    s.erase(0, 1);
  }
  int exponent = 0;
  auto epos = s.find_first_of("eE");
  if (epos != std::string::npos) {
    std::string es = s.substr(epos + 1);
    s = s.substr(0, epos);
    bool eneg = false;
    if (!es.empty() && (es[0] == '+' || es[0] == '-')) {
      eneg = es[0] == '-';
      es.erase(0, 1);
    }
    if (!all_digits(es) || es.size() > 6)
      fail(ErrorCode::ParseError, "bad exponent in number '" + text + "'");
    exponent = std::stoi(es);
    if (eneg) exponent = -exponent;
  }
  std::string int_part = s, frac_part;
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    int_part = s.substr(0, dot);
    frac_part = s.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty())
    fail(ErrorCode::ParseError, "empty number '" + text + "'");
  if ((!int_part.empty() && !all_digits(int_part)) ||
      (!frac_part.empty() && !all_digits(frac_part)))
    fail(ErrorCode::ParseError, "bad number '" + text + "'");

  BigInt mantissa(int_part.empty() ? "0" : int_part);
  for (char c : frac_part) mantissa = mantissa * 10 + (c - '0');
  int scale = static_cast<int>(frac_part.size()) - exponent;

  Rational value(mantissa);
  if (scale > 0)
    value /= pow10(scale);
  else if (scale < 0)
    value *= pow10(-scale);
  if (negative) value = -value;
  return value;
}

}  // namespace

BigInt floor_to_int(const Rational& r) {
  BigInt n = numerator(r), d = denominator(r);
  BigInt q = n / d;
  if (n < 0 && q * d != n) --q;
  return q;
}

std::int64_t to_i64(const BigInt& v) {
  if (v < std::numeric_limits<std::int64_t>::min() ||
      v > std::numeric_limits<std::int64_t>::max())
    fail(ErrorCode::BudgetOverflow, "value out of 64-bit range");
  return static_cast<std::int64_t>(v);
}

std::int64_t floor_to_i64(const Rational& r) { return to_i64(floor_to_int(r)); }

std::int64_t round_half_up_i64(const Rational& r) {
  return to_i64(floor_to_int(r + Rational(1, 2)));
}

Rational round_decimal(const Rational& r, int places) {
  BigInt scale = pow10(places);
  Rational t = r * scale;
  BigInt rounded;
  if (t >= 0)
    rounded = floor_to_int(t + Rational(1, 2));
  else
    rounded = -floor_to_int(-t + Rational(1, 2));
  return Rational(rounded) / scale;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational parse_rational(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) fail(ErrorCode::ParseError, "empty rational");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string ns = trim(s.substr(0, slash));
    std::string ds = trim(s.substr(slash + 1));
    bool nneg = false;
    if (!ns.empty() && (ns[0] == '+' || ns[0] == '-')) {
      nneg = ns[0] == '-';
      ns.erase(0, 1);
    }
    if (!all_digits(ns) || !all_digits(ds))
      fail(ErrorCode::ParseError, "bad fraction '" + text + "'");
    BigInt n(ns), d(ds);
    if (d == 0) fail(ErrorCode::ParseError, "zero denominator in '" + text + "'");
    Rational r(n, d);
    return nneg ? -r : r;
  }
  return parse_decimal(s);
}

std::string to_fraction_string(const Rational& r) {
  BigInt n = numerator(r), d = denominator(r);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

std::optional<std::string> to_decimal_string(const Rational& r, int max_digits) {
  BigInt n = numerator(r), d = denominator(r);
  bool negative = n < 0;
  if (negative) n = -n;
  // Terminating decimals need denominator 2^a * 5^b.
  int a = 0, b = 0;
  BigInt rest = d;
  while (rest % 2 == 0) {
    rest /= 2;
    ++a;
  }
  while (rest % 5 == 0) {
    rest /= 5;
    ++b;
  }
  if (rest != 1) return std::nullopt;
  int digits = std::max(a, b);
  if (digits > max_digits) return std::nullopt;
  BigInt scaled = n * pow10(digits) / d;
  std::string body = scaled.str();
  std::string out;
  if (digits == 0) {
    out = body;
  } else {
    if (static_cast<int>(body.size()) <= digits)
      body.insert(0, digits + 1 - body.size(), '0');
    out = body.substr(0, body.size() - digits) + "." +
          body.substr(body.size() - digits);
  }
  if (negative) out.insert(0, 1, '-');
  return out;
}

Rational parse_weight(const std::string& text) {
  std::string s = trim(text);
  if (s.find('/') != std::string::npos) return parse_rational(s);
  return parse_rational(s) / 100;
}

std::string weight_to_string(const Rational& w) {
  if (auto dec = to_decimal_string(w * 100, 12)) {
    if (dec->find('.') == std::string::npos) *dec += ".0";
    return *dec;
  }
  return to_fraction_string(w);
}

std::int64_t parse_token_count(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) fail(ErrorCode::ParseError, "empty token count");
  BigInt scale = 1;
  char last = static_cast<char>(std::toupper(static_cast<unsigned char>(s.back())));
  if (last == 'K' || last == 'M' || last == 'B' || last == 'T') {
    switch (last) {
      case 'K': scale = 1000; break;
      case 'M': scale = 1000000; break;
      case 'B': scale = 1000000000; break;
      case 'T': scale = BigInt("1000000000000"); break;
    }
    s.pop_back();
    s = trim(s);
  }
  Rational value = parse_rational(s) * scale;
  if (value < 0)
    fail(ErrorCode::ParseError, "negative token count '" + text + "'");
  if (denominator(value) != 1)
    fail(ErrorCode::ParseError,
         "token count '" + text + "' is not a whole number of tokens");
  return to_i64(numerator(value));
}

}  // namespace blendplan
