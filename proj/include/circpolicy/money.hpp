#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace circpolicy {

/// Fixed-point currency amount in nano-units (1e-9 of the currency).
///
/// All follower costs are compared in this representation so that indifference
/// points between routes are exact rather than subject to binary rounding.
class Money {
public:
  static constexpr std::int64_t kTicksPerUnit = 1'000'000'000;

  constexpr Money() = default;

  static constexpr Money from_ticks(std::int64_t ticks) noexcept {
    Money m;
    m.ticks_ = ticks;
    return m;
  }
  /// Rounds to the nearest tick.
  static Money from_double(double amount);
  /// Exact parse of a decimal string such as "-0.00093" (at most nine
  /// fractional digits). Throws std::invalid_argument.
  static Money parse(std::string_view text);

  constexpr std::int64_t ticks() const noexcept { return ticks_; }
  double to_double() const noexcept {
    return static_cast<double>(ticks_) / static_cast<double>(kTicksPerUnit);
  }

  /// Fixed-point decimal string, rounded half away from zero.
  std::string to_string(int fractional_digits = 6) const;

  constexpr Money& operator+=(Money o) noexcept {
    ticks_ += o.ticks_;
    return *this;
  }
  constexpr Money& operator-=(Money o) noexcept {
    ticks_ -= o.ticks_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) noexcept { return a += b; }
  friend constexpr Money operator-(Money a, Money b) noexcept { return a -= b; }
  friend constexpr Money operator-(Money a) noexcept { return from_ticks(-a.ticks_); }
  friend constexpr Money operator*(Money a, std::int64_t n) noexcept {
    return from_ticks(a.ticks_ * n);
  }
  friend constexpr Money operator*(std::int64_t n, Money a) noexcept { return a * n; }

  friend constexpr auto operator<=>(Money, Money) = default;

private:
  std::int64_t ticks_ = 0;
};

inline Money max(Money a, Money b) noexcept { return a < b ? b : a; }
inline Money min(Money a, Money b) noexcept { return a < b ? a : b; }

std::ostream& operator<<(std::ostream& os, Money m);

}  // namespace circpolicy
