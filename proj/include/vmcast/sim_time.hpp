#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace vmcast {

/// Simulation clock value stored as integer microseconds.
///
/// Used both for instants and for durations. Integer storage keeps event
/// ordering and trace output identical across platforms.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_micros(std::int64_t us) { return SimTime(us); }
  static SimTime from_seconds(double s) { return SimTime(std::llround(s * 1e6)); }
  static constexpr SimTime from_millis(std::int64_t ms) { return SimTime(ms * 1000); }

  constexpr std::int64_t micros() const { return us_; }
  constexpr double seconds() const { return static_cast<double>(us_) / 1e6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime(us_ + o.us_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(us_ - o.us_); }
  constexpr SimTime& operator+=(SimTime o) {
    us_ += o.us_;
    return *this;
  }
  constexpr SimTime operator*(std::int64_t k) const { return SimTime(us_ * k); }
  constexpr SimTime operator/(std::int64_t k) const { return SimTime(us_ / k); }

 private:
  constexpr explicit SimTime(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

/// Renders seconds with exactly six decimals ("12.000350").
std::string format_seconds(SimTime t);

}  // namespace vmcast
