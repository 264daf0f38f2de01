#pragma once

#include <cstdio>
#include <string>

namespace loam {

// Shortest round-trippable decimal form; keeps metrics files byte-identical
// across runs of the same build.
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace loam
