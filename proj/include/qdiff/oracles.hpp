#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "qdiff/errors.hpp"

namespace qdiff {

// Bessel functions of the first kind J_0..J_nmax at argument x >= 0, by
// Miller's downward recurrence, normalized through J_0^2 + 2 sum J_n^2 = 1.
inline std::vector<double> bessel_j_array(double x, int nmax) {
    if (nmax < 0) throw ParameterError("nmax must be >= 0");
    std::vector<double> out(static_cast<std::size_t>(nmax + 1), 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    // start well above both the argument and the requested order
    const int start =
        nmax + static_cast<int>(std::ceil(x + 20.0 * std::cbrt(x + 1.0))) + 30;
    double jp = 0.0;       // J_{k+1} (unnormalized)
    double jc = 1e-30;     // J_k; large enough that norm cannot underflow to 0
    double norm = 0.0;      // accumulates J_0^2 + 2 sum_{n>=1} J_n^2
    for (int k = start; k >= 0; --k) {
        const double jm = (2.0 * (k + 1)) / x * jc - jp;  // J_k from J_{k+1}, J_{k+2}
        jp = jc;
        jc = jm;
        // rescale before jc^2 in the norm can overflow
        if (std::abs(jc) > 1e140) {
            const double s = 1e-140;
            jc *= s;
            jp *= s;
            norm *= s * s;
            for (double& v : out) v *= s;
        }
        if (k <= nmax) out[static_cast<std::size_t>(k)] = jc;
        norm += (k == 0 ? 1.0 : 2.0) * jc * jc;
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (double& v : out) v *= scale;
    return out;
}

// Free tight-binding chain launched from a single site: population at physical
// index n after time t is J_n(2|J|t)^2.
inline double bessel_free_density(int n, double J, double t) {
    if (t < 0.0) throw ParameterError("t must be >= 0");
    const int a = std::abs(n);
    const double j = bessel_j_array(2.0 * std::abs(J) * t, a)[static_cast<std::size_t>(a)];
    return j * j;
}

// Second moment of the free chain: 2 J^2 t^2.
inline double free_ballistic_variance(double J, double t) { return 2.0 * J * J * t * t; }

// Exact second moment of the uniform chain under uniform dephasing Gamma:
//   sigma^2(t) = (4J^2/Gamma) t - (4J^2/Gamma^2) (1 - e^{-Gamma t}),
// ballistic 2J^2t^2 at small Gamma t, diffusive slope 4J^2/Gamma at large.
inline double haken_strobl_variance(double J, double Gamma, double t) {
    if (Gamma < 0.0) throw ParameterError("Gamma must be >= 0");
    if (t < 0.0) throw ParameterError("t must be >= 0");
    const double gt = Gamma * t;
    if (gt < 1e-3) {
        // series, avoids cancellation: 2J^2t^2 (1 - gt/3 + gt^2/12 - gt^3/60)
        return 2.0 * J * J * t * t *
               (1.0 - gt / 3.0 + gt * gt / 12.0 - gt * gt * gt / 60.0);
    }
    return (4.0 * J * J / Gamma) * t - (4.0 * J * J / (Gamma * Gamma)) * (-std::expm1(-gt));
}

// J = 0 chain: off-diagonal entries rotate with the potential difference and
// decay at the mean dephasing rate.
inline std::complex<double> static_offdiagonal_decay(std::complex<double> rho0_entry,
                                                     double Vn, double Vm, double Gn,
                                                     double Gm, double t) {
    const std::complex<double> phase(0.0, -(Vn - Vm) * t);
    return rho0_entry * std::exp(phase - 0.5 * (Gn + Gm) * t);
}

}  // namespace qdiff
