#pragma once

#include <cstdint>
#include <string>

namespace tbsim {

// Fixed-point with up to 6 decimals, trailing zeros trimmed ("3", "1001.01").
// Deterministic for a given build; used for every CSV the project writes.
std::string fmt_ms(double v);

// Three decimals, kept ("1.000").
std::string fmt_ratio(double v);

}  // namespace tbsim
