#pragma once

#include <algorithm>
#include <vector>

#include "qdiff/errors.hpp"

namespace qdiff {

// Per-site dephasing rates Gamma_i >= 0. The uniform profile (one scalar
// everywhere) is the usual operating mode.
struct DephasingProfile {
    std::vector<double> rates;

    static DephasingProfile uniform(int n, double gamma) {
        if (gamma < 0.0) throw ParameterError("dephasing rate must be >= 0");
        DephasingProfile p;
        p.rates.assign(static_cast<std::size_t>(n), gamma);
        return p;
    }

    static DephasingProfile from_table(std::vector<double> rates) {
        for (double g : rates)
            if (g < 0.0) throw ParameterError("dephasing rates must be >= 0");
        DephasingProfile p;
        p.rates = std::move(rates);
        return p;
    }

    int size() const { return static_cast<int>(rates.size()); }
    bool is_zero() const {
        return std::all_of(rates.begin(), rates.end(), [](double g) { return g == 0.0; });
    }
    double max_rate() const {
        return rates.empty() ? 0.0 : *std::max_element(rates.begin(), rates.end());
    }
};

}  // namespace qdiff
