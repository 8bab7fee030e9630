#include "tcsim/half_integer.hpp"

#include <charconv>
#include <cmath>

#include "tcsim/errors.hpp"

namespace tcsim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DomainError("not a half-integer: '" + std::string(whole) + "'");
  }
  return out;
}

}  // namespace

HalfInt HalfInt::parse(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) throw DomainError("empty half-integer");
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const std::int64_t num = parse_int(trim(s.substr(0, slash)), s);
    const std::int64_t den = parse_int(trim(s.substr(slash + 1)), s);
    if (den == 1) return from_int(num);
    if (den == 2) return from_twice(num);
    throw DomainError("half-integer denominator must be 1 or 2: '" + std::string(s) + "'");
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DomainError("not a half-integer: '" + std::string(s) + "'");
  }
  return from_double(value);
}

HalfInt HalfInt::from_double(double value) {
  const double twice = 2.0 * value;
  if (!std::isfinite(twice) || twice != std::nearbyint(twice) || std::fabs(twice) > 9.0e15) {
    throw DomainError("not a half-integer: " + std::to_string(value));
  }
  return from_twice(static_cast<std::int64_t>(twice));
}

std::string HalfInt::to_string() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

}  // namespace tcsim
