#pragma once

#include <cstdio>
#include <string>

namespace ustat {

/// Kahan-compensated accumulator. Used wherever a sum can exceed ~1e4 terms.
class kahan_sum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

/// 17 significant digits: round-trip exact for IEEE doubles.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace ustat
