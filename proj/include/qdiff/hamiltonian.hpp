#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qdiff/errors.hpp"
#include "qdiff/geometry.hpp"
#include "qdiff/potential.hpp"

namespace qdiff {

// Real symmetric tridiagonal Hamiltonian in units hbar = 1. hopping[i] is the
// matrix element H_{i,i+1} stored directly (the overall minus sign of a
// positive tunneling rate is already folded in, e.g. hopping = -1 for unit
// tunneling).
struct Hamiltonian {
    std::vector<double> diagonal;  // length N
    std::vector<double> hopping;   // length N-1

    int size() const { return static_cast<int>(diagonal.size()); }

    Eigen::MatrixXd dense() const {
        const int n = size();
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = diagonal[static_cast<std::size_t>(i)];
        for (int i = 0; i + 1 < n; ++i) {
            m(i, i + 1) = hopping[static_cast<std::size_t>(i)];
            m(i + 1, i) = hopping[static_cast<std::size_t>(i)];
        }
        return m;
    }
};

inline Hamiltonian assemble_hamiltonian(const LatticeGeometry& g,
                                        const PotentialProfile& potential,
                                        double hopping_J) {
    const int n = g.total_sites();
    if (static_cast<int>(potential.values.size()) != n)
        throw StructuralError("potential length does not match geometry");
    if (hopping_J == 0.0) throw ParameterError("hopping_J must be nonzero");
    Hamiltonian h;
    h.diagonal = potential.values;
    h.hopping.assign(static_cast<std::size_t>(n - 1), hopping_J);
    return h;
}

}  // namespace qdiff
