#include "vmcast/sim_time.hpp"

#include <cstdio>

namespace vmcast {

std::string format_seconds(SimTime t) {
  std::int64_t us = t.micros();
  const bool neg = us < 0;
  if (neg) us = -us;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%lld.%06lld", neg ? "-" : "", static_cast<long long>(us / 1000000),
                static_cast<long long>(us % 1000000));
  return buf;
}

}  // namespace vmcast
