#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <fmt/format.h>

namespace daytrip {

// Shortest round-trip representation; integral values print without a
// fractional part so rereading and byte-comparison are stable.
inline std::string num(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.007199254740992e15)
    return fmt::format("{}", static_cast<std::int64_t>(v));
  return fmt::format("{}", v);
}

inline std::string num(std::int64_t v) { return fmt::format("{}", v); }
inline std::string num(std::uint64_t v) { return fmt::format("{}", v); }
inline std::string num(int v) { return fmt::format("{}", v); }

}  // namespace daytrip
