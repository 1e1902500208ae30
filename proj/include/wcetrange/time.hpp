#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace wcetrange {

/// Simulator time in integer ticks. Instants are non-negative; differences of
/// instants (e.g. deadline distances) may be negative.
class Time {
 public:
  constexpr Time() = default;
  constexpr explicit Time(std::int64_t ticks) : ticks_(ticks) {}

  constexpr std::int64_t ticks() const { return ticks_; }

  constexpr auto operator<=>(const Time&) const = default;

  constexpr Time& operator+=(Time o) {
    ticks_ += o.ticks_;
    return *this;
  }
  constexpr Time& operator-=(Time o) {
    ticks_ -= o.ticks_;
    return *this;
  }
  friend constexpr Time operator+(Time a, Time b) { return Time{a.ticks_ + b.ticks_}; }
  friend constexpr Time operator-(Time a, Time b) { return Time{a.ticks_ - b.ticks_}; }
  friend constexpr Time operator*(Time a, std::int64_t k) { return Time{a.ticks_ * k}; }

 private:
  std::int64_t ticks_ = 0;
};

/// Signed tick count between an end time and a deadline.
using Distance = std::int64_t;

/// Exact conversion between decimal millisecond strings and ticks.
///
/// Millisecond values are held internally in nanoseconds (six fractional
/// digits of a millisecond), so any decimal with at most six fractional digits
/// converts without rounding.
class TickScale {
 public:
  static constexpr std::int64_t kNanosPerMs = 1'000'000;

  /// 0.1 ms, the default simulator resolution.
  constexpr TickScale() = default;
  constexpr explicit TickScale(std::int64_t tick_nanos) : tick_nanos_(tick_nanos) {}

  /// Throws std::invalid_argument on malformed or non-positive input.
  static TickScale from_ms(std::string_view tick_ms);

  constexpr std::int64_t tick_nanos() const { return tick_nanos_; }

  /// Parses a millisecond decimal and converts it to ticks. Throws
  /// std::invalid_argument when malformed or not a multiple of the tick.
  Time parse_ms(std::string_view ms) const;

  /// Shortest exact decimal millisecond rendering, e.g. "0.1", "23", "1820000".
  std::string format_ms(Time t) const;
  std::string tick_ms() const;

  double to_ms(double ticks) const {
    return ticks * static_cast<double>(tick_nanos_) / static_cast<double>(kNanosPerMs);
  }

  constexpr bool operator==(const TickScale&) const = default;

 private:
  std::int64_t tick_nanos_ = 100'000;
};

/// Parses a non-negative decimal with at most six fractional digits into
/// nanoseconds of a millisecond. Throws std::invalid_argument.
std::int64_t parse_decimal_nanos(std::string_view text);
std::string format_decimal_nanos(std::int64_t nanos);

}  // namespace wcetrange
