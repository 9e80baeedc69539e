#include "circpolicy/money.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>
#include <stdexcept>

#include "circpolicy/errors.hpp"

namespace circpolicy {

Money Money::from_double(double amount) {
  const double scaled = amount * static_cast<double>(kTicksPerUnit);
  if (!std::isfinite(scaled) || std::fabs(scaled) > 9.0e18) {
    throw Error("currency amount out of range: " + std::to_string(amount));
  }
  return from_ticks(std::llround(scaled));
}

Money Money::parse(std::string_view text) {
  const std::string original(text);
  auto fail = [&]() -> Money {
    throw std::invalid_argument("not a decimal currency amount: '" + original + "'");
  };
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if ((whole.empty() && frac.empty()) || frac.size() > 9 ||
      (dot != std::string_view::npos && frac.empty() && whole.empty())) {
    return fail();
  }
  constexpr std::int64_t kLimit = 9'000'000'000;  // whole units representable in ticks
  std::int64_t units = 0;
  for (char c : whole) {
    if (c < '0' || c > '9') {
      return fail();
    }
    units = units * 10 + (c - '0');
    if (units > kLimit) {
      return fail();
    }
  }
  std::int64_t nanos = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    const char c = i < frac.size() ? frac[i] : '0';
    if (c < '0' || c > '9') {
      return fail();
    }
    nanos = nanos * 10 + (c - '0');
  }
  const std::int64_t ticks = units * kTicksPerUnit + nanos;
  return from_ticks(negative ? -ticks : ticks);
}

std::string Money::to_string(int fractional_digits) const {
  if (fractional_digits < 0 || fractional_digits > 9) {
    fractional_digits = 9;
  }
  std::int64_t divisor = 1;
  for (int i = fractional_digits; i < 9; ++i) {
    divisor *= 10;
  }
  const bool negative = ticks_ < 0;
  std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(ticks_ + 1)) + 1u
                               : static_cast<std::uint64_t>(ticks_);
  const auto udiv = static_cast<std::uint64_t>(divisor);
  mag = (mag + udiv / 2) / udiv;

  std::uint64_t scale = 1;
  for (int i = 0; i < fractional_digits; ++i) {
    scale *= 10;
  }
  const std::uint64_t whole = mag / scale;
  const std::uint64_t frac = mag % scale;

  std::string out;
  if (negative && mag != 0) {
    out += '-';
  }
  out += std::to_string(whole);
  if (fractional_digits > 0) {
    std::string f = std::to_string(frac);
    out += '.';
    out.append(static_cast<std::size_t>(fractional_digits) - f.size(), '0');
    out += f;
  }
  return out;
}

std::ostream& operator<<(std::ostream& os, Money m) { return os << m.to_string(); }

}  // namespace circpolicy
