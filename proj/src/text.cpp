#include "tbsim/text.hpp"

#include <cstdio>

namespace tbsim {

std::string fmt_ms(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    std::string s(buf);
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        auto last = s.find_last_not_of('0');
        if (last == dot) last -= 1;  // drop the dot too
        s.erase(last + 1);
    }
    if (s == "-0") s = "0";
    return s;
}

std::string fmt_ratio(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace tbsim
