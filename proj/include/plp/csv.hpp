#pragma once

#include <cstdio>
#include <cstdint>
#include <string>

namespace plp {

// Shortest round-trippable-ish decimal form, stable across runs; all CSV
// output funnels through this so identical numbers always print identically.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string fmt_hash(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace plp
