#pragma once

#include "rabi/model.hpp"
#include "rabi/units.hpp"

#include <cmath>
#include <vector>

namespace testing {

// E0 at 2e13 W/cm^2
inline double E0_ref() { return rabi::field_from_intensity(2e13); }

inline double l2_relative(const std::vector<double>& a, const std::vector<double>& b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

inline std::size_t argmax(const std::vector<double>& v, std::size_t lo = 0, std::size_t hi = 0)
{
    if (hi == 0)
        hi = v.size();
    std::size_t best = lo;
    for (std::size_t i = lo; i < hi; ++i)
        if (v[i] > v[best])
            best = i;
    return best;
}

} // namespace testing
