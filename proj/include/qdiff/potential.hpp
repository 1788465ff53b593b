#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qdiff/errors.hpp"
#include "qdiff/geometry.hpp"

namespace qdiff {

enum class PotentialKind { UniformZero, Disordered, Harper };

inline std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::UniformZero: return "free";
        case PotentialKind::Disordered: return "disordered";
        case PotentialKind::Harper: return "harper";
    }
    return "?";
}

// golden-ratio-conjugate wave-number ratio, the maximally incommensurate choice
inline constexpr double kGoldenBeta = 0.61803398874989484820;

// On-site energies V_i over the full chain, zero outside the central window,
// together with the parameters that generated them.
struct PotentialProfile {
    std::vector<double> values;  // length N, storage-indexed
    PotentialKind kind = PotentialKind::UniformZero;
    // provenance
    double V = 0.0;       // disordered amplitude
    double Delta = 0.0;   // harper strength
    double beta = kGoldenBeta;
    double phi = 0.0;
    std::uint64_t seed = 0;
};

inline PotentialProfile zero_potential(const LatticeGeometry& g) {
    PotentialProfile p;
    p.values.assign(static_cast<std::size_t>(g.total_sites()), 0.0);
    return p;
}

// Fair-coin +-V draws on the 2L+1 window sites, zero elsewhere.
// Pure function of (geometry, V, seed).
inline PotentialProfile disordered_potential(const LatticeGeometry& g, double V,
                                             std::uint64_t seed) {
    if (V <= 0.0) throw ParameterError("disordered potential requires V > 0");
    PotentialProfile p = zero_potential(g);
    p.kind = PotentialKind::Disordered;
    p.V = V;
    p.seed = seed;
    std::mt19937_64 rng(seed);
    for (int i = -g.half_width_L; i <= g.half_width_L; ++i)
        p.values[static_cast<std::size_t>(g.storage_index(i))] = (rng() >> 63) ? V : -V;
    return p;
}

// Delta * cos(2*pi*beta*i + phi) on the window, i being the physical index.
inline PotentialProfile harper_potential(const LatticeGeometry& g, double Delta,
                                         double beta = kGoldenBeta, double phi = 0.0) {
    PotentialProfile p = zero_potential(g);
    p.kind = PotentialKind::Harper;
    p.Delta = Delta;
    p.beta = beta;
    p.phi = phi;
    for (int i = -g.half_width_L; i <= g.half_width_L; ++i)
        p.values[static_cast<std::size_t>(g.storage_index(i))] =
            Delta * std::cos(2.0 * std::numbers::pi * beta * i + phi);
    return p;
}

}  // namespace qdiff
