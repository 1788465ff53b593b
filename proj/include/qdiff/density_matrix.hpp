#pragma once

#include <Eigen/Dense>

#include "qdiff/geometry.hpp"

namespace qdiff {

// Dense Hermitian unit-trace state in the lattice-site basis.
using DensityMatrix = Eigen::MatrixXcd;

// |c><c| at the chain center.
inline DensityMatrix initial_density_matrix(const LatticeGeometry& g) {
    const int n = g.total_sites();
    DensityMatrix rho = DensityMatrix::Zero(n, n);
    rho(g.center_index(), g.center_index()) = 1.0;
    return rho;
}

inline Eigen::VectorXcd initial_state_vector(const LatticeGeometry& g) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(g.total_sites());
    psi(g.center_index()) = 1.0;
    return psi;
}

}  // namespace qdiff
