#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qdiff/errors.hpp"
#include "qdiff/geometry.hpp"
#include "qdiff/lindblad.hpp"

namespace qdiff {

// Raw second moment about the launch site (no mean subtraction).
inline double second_moment(const Eigen::VectorXd& populations, const LatticeGeometry& g) {
    return second_moment_of(populations, g);
}

struct MomentSeries {
    std::vector<double> times;
    std::vector<double> sigma2;
    std::string source = "single-run";  // or "ensemble-average"
    int realization_count = 1;
    double validity_horizon = 0.0;  // times beyond this are excluded from fits

    static MomentSeries from_record(const EvolutionRecord& rec) {
        MomentSeries s;
        s.times = rec.times;
        s.sigma2 = rec.sigma2;
        s.validity_horizon = rec.validity_horizon();
        return s;
    }
};

struct FitWindow {
    double t_lo = 0.0;
    double t_hi = 0.0;
};

// Last decade of valid times.
inline FitWindow default_fit_window(const MomentSeries& s) {
    const double t_hi =
        s.times.empty() ? 0.0 : std::min(s.times.back(), s.validity_horizon);
    return {t_hi / 10.0, t_hi};
}

struct ExponentFit {
    double nu = 0.0;
    double log_prefactor = 0.0;  // log10 of the power-law prefactor
    FitWindow window;
    double rms_residual = 0.0;  // in log10 units
    int point_count = 0;

    double model_log10_sigma2(double t) const {
        return log_prefactor + nu * std::log10(t);
    }
};

// OLS of log10 sigma2 on log10 t over the window (valid points only).
inline ExponentFit fit_power_law(const MomentSeries& s, const FitWindow& window) {
    if (!(window.t_lo < window.t_hi)) throw ParameterError("fit window: t_lo < t_hi required");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const double t = s.times[i];
        if (t < window.t_lo || t > window.t_hi) continue;
        if (t > s.validity_horizon) continue;
        if (t <= 0.0) continue;
        const double v = s.sigma2[i];
        if (v <= 0.0) throw ParameterError("fit_power_law: nonpositive sigma2 in window");
        x.push_back(std::log10(t));
        y.push_back(std::log10(v));
    }
    const int np = static_cast<int>(x.size());
    if (np < 5) throw ParameterError("fit_power_law: fewer than 5 points in window");
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < np; ++i) {
        mx += x[static_cast<std::size_t>(i)];
        my += y[static_cast<std::size_t>(i)];
    }
    mx /= np;
    my /= np;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < np; ++i) {
        const double dx = x[static_cast<std::size_t>(i)] - mx;
        sxx += dx * dx;
        sxy += dx * (y[static_cast<std::size_t>(i)] - my);
    }
    ExponentFit fit;
    fit.nu = sxy / sxx;
    fit.log_prefactor = my - fit.nu * mx;
    fit.window = window;
    fit.point_count = np;
    double ss = 0.0;
    for (int i = 0; i < np; ++i) {
        const double r = y[static_cast<std::size_t>(i)] - fit.log_prefactor -
                         fit.nu * x[static_cast<std::size_t>(i)];
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / np);
    return fit;
}

enum class RegimeLabel { Subdiffusive, Diffusive, Superdiffusive, Ballistic, Superballistic };

inline std::string to_string(RegimeLabel r) {
    switch (r) {
        case RegimeLabel::Subdiffusive: return "subdiffusive";
        case RegimeLabel::Diffusive: return "diffusive";
        case RegimeLabel::Superdiffusive: return "superdiffusive";
        case RegimeLabel::Ballistic: return "ballistic";
        case RegimeLabel::Superballistic: return "superballistic";
    }
    return "?";
}

// Band classification of the fitted exponent: nu = 1 diffusive, nu = 2
// ballistic, each with a tolerance band of half-width epsilon.
inline RegimeLabel classify_regime(double nu, double epsilon = 0.05) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw ParameterError("epsilon must be in (0, 0.5)");
    if (std::abs(nu - 1.0) <= epsilon) return RegimeLabel::Diffusive;
    if (std::abs(nu - 2.0) <= epsilon) return RegimeLabel::Ballistic;
    if (nu < 1.0) return RegimeLabel::Subdiffusive;
    if (nu < 2.0) return RegimeLabel::Superdiffusive;
    return RegimeLabel::Superballistic;
}

}  // namespace qdiff
