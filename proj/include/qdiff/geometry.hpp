#pragma once

#include <cmath>
#include <cstdlib>

#include "qdiff/errors.hpp"

namespace qdiff {

// 1D chain: a central region of 2L+1 sites where the on-site potential may be
// nonzero, flanked by two zero-potential leads. Physical site index runs over
// [-(L+lead), +(L+lead)] and maps to storage index i + (N-1)/2.
struct LatticeGeometry {
    int half_width_L = 0;
    int lead_length = 0;

    LatticeGeometry() = default;
    LatticeGeometry(int L, int lead) : half_width_L(L), lead_length(lead) {
        if (L < 0) throw ParameterError("half_width_L must be >= 0");
        if (lead < 0) throw ParameterError("lead_length must be >= 0");
    }

    int total_sites() const { return 2 * (half_width_L + lead_length) + 1; }
    int center_index() const { return half_width_L + lead_length; }

    // physical (center-relative) index of storage slot s
    int physical_index(int s) const { return s - center_index(); }
    int storage_index(int i) const { return i + center_index(); }

    bool in_window(int physical) const { return std::abs(physical) <= half_width_L; }
};

// Lead sizing from the simulation horizon: the ballistic front moves at most
// 2|J| sites per unit time, so this keeps the boundary outside the light cone.
inline int auto_lead_length(double hopping_J, double t_max) {
    return static_cast<int>(std::ceil(2.0 * std::abs(hopping_J) * t_max)) + 10;
}

}  // namespace qdiff
