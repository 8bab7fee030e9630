#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace tcsim {

/// Exact half-integer stored as twice its value, so 3/2 is held as 3.
class HalfInt {
 public:
  constexpr HalfInt() = default;

  static constexpr HalfInt from_twice(std::int64_t twice) { return HalfInt(twice); }
  static constexpr HalfInt from_int(std::int64_t value) { return HalfInt(2 * value); }

  /// Accepts "3", "-1.5", "3/2". Throws DomainError for anything not a
  /// multiple of 1/2.
  static HalfInt parse(std::string_view text);

  /// Throws DomainError unless 2*value is an integer.
  static HalfInt from_double(double value);

  constexpr std::int64_t twice() const { return twice_; }
  constexpr double value() const { return static_cast<double>(twice_) / 2.0; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  std::string to_string() const;

  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return HalfInt(a.twice_ + b.twice_); }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return HalfInt(a.twice_ - b.twice_); }
  friend constexpr HalfInt operator-(HalfInt a) { return HalfInt(-a.twice_); }
  friend constexpr auto operator<=>(HalfInt, HalfInt) = default;

 private:
  constexpr explicit HalfInt(std::int64_t twice) : twice_(twice) {}
  std::int64_t twice_ = 0;
};

/// 2a and 2b have the same parity, i.e. a - b is an integer.
constexpr bool same_parity(HalfInt a, HalfInt b) {
  return ((a.twice() - b.twice()) % 2) == 0;
}

}  // namespace tcsim
