#include "wcetrange/time.hpp"

#include <limits>
#include <stdexcept>

namespace wcetrange {

std::int64_t parse_decimal_nanos(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty time value");
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool seen_dot = false;
  bool seen_digit = false;
  constexpr std::int64_t kLimit = std::numeric_limits<std::int64_t>::max() / 100;
  for (char c : text) {
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("malformed time value '" + std::string(text) + "'");
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument("malformed time value '" + std::string(text) + "'");
    seen_digit = true;
    if (seen_dot) {
      if (++frac_digits > 6) {
        if (c != '0') throw std::invalid_argument("time value '" + std::string(text) + "' has more than 6 decimals");
        continue;
      }
      frac = frac * 10 + (c - '0');
    } else {
      whole = whole * 10 + (c - '0');
      if (whole > kLimit / TickScale::kNanosPerMs) throw std::invalid_argument("time value out of range");
    }
  }
  if (!seen_digit) throw std::invalid_argument("malformed time value '" + std::string(text) + "'");
  for (int i = std::min(frac_digits, 6); i < 6; ++i) frac *= 10;
  return whole * TickScale::kNanosPerMs + frac;
}

std::string format_decimal_nanos(std::int64_t nanos) {
  std::string sign;
  if (nanos < 0) {
    sign = "-";
    nanos = -nanos;
  }
  std::string out = sign + std::to_string(nanos / TickScale::kNanosPerMs);
  std::int64_t frac = nanos % TickScale::kNanosPerMs;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 6 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  return out;
}

TickScale TickScale::from_ms(std::string_view tick_ms) {
  auto nanos = parse_decimal_nanos(tick_ms);
  if (nanos <= 0) throw std::invalid_argument("tick_ms must be positive");
  return TickScale{nanos};
}

Time TickScale::parse_ms(std::string_view ms) const {
  auto nanos = parse_decimal_nanos(ms);
  if (nanos % tick_nanos_ != 0) {
    throw std::invalid_argument("value " + std::string(ms) + " ms is not a multiple of the tick (" + tick_ms() +
                                " ms)");
  }
  return Time{nanos / tick_nanos_};
}

std::string TickScale::format_ms(Time t) const { return format_decimal_nanos(t.ticks() * tick_nanos_); }

std::string TickScale::tick_ms() const { return format_decimal_nanos(tick_nanos_); }

}  // namespace wcetrange
