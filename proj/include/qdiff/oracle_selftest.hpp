#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "qdiff/lindblad.hpp"
#include "qdiff/oracles.hpp"

namespace qdiff {

struct OracleCheck {
    std::string name;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct OracleReport {
    std::vector<OracleCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

// |<n| e^{-iHt} |c>|^2 by eigendecomposition; the brute-force reference for
// the Bessel propagator.
inline Eigen::VectorXd brute_force_free_populations(int n_sites, double J, double t) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_sites, n_sites);
    for (int i = 0; i + 1 < n_sites; ++i) {
        h(i, i + 1) = J;
        h(i + 1, i) = J;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const int c = (n_sites - 1) / 2;
    const Eigen::VectorXd phases = es.eigenvalues() * t;
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(n_sites);
    for (int k = 0; k < n_sites; ++k) {
        const std::complex<double> e(std::cos(phases(k)), -std::sin(phases(k)));
        amp += e * es.eigenvectors().col(k) * es.eigenvectors()(c, k);
    }
    return amp.cwiseAbs2();
}

}  // namespace detail

// Each closed-form oracle vs its declared brute-force reference.
inline OracleReport run_oracle_selftests(double tolerance_scale = 1.0) {
    OracleReport report;
    auto add = [&](const std::string& name, double dev, double tol) {
        tol *= tolerance_scale;
        report.checks.push_back({name, dev, tol, dev <= tol});
    };

    {  // Bessel propagator vs brute-force evolution of a 101-site chain
        const int n = 101, c = 50;
        const double t = 1.0, J = -1.0;
        const Eigen::VectorXd pops = detail::brute_force_free_populations(n, J, t);
        double dev = 0.0;
        for (int s = 0; s < n; ++s)
            dev = std::max(dev, std::abs(pops(s) - bessel_free_density(s - c, J, t)));
        add("bessel_free_density vs matrix exponential", dev, 1e-10);
    }
    {  // normalization sum over the whole chain
        double dev = 0.0;
        for (double t : {0.5, 5.0, 20.0}) {
            const double x = 2.0 * t;
            const int nmax = static_cast<int>(x) + 60;
            const std::vector<double> j = bessel_j_array(x, nmax);
            double sum = j[0] * j[0];
            for (int k = 1; k <= nmax; ++k) sum += 2.0 * j[static_cast<std::size_t>(k)] *
                                                    j[static_cast<std::size_t>(k)];
            dev = std::max(dev, std::abs(sum - 1.0));
        }
        add("bessel normalization sum J_n^2 = 1", dev, 1e-12);
    }
    {  // ballistic variance identity sum n^2 J_n(2t)^2 = 2 t^2
        const double t = 2.0, J = -1.0, x = 2.0 * t;
        const int nmax = static_cast<int>(x) + 60;
        const std::vector<double> j = bessel_j_array(x, nmax);
        double s2 = 0.0;
        for (int k = 1; k <= nmax; ++k)
            s2 += 2.0 * k * k * j[static_cast<std::size_t>(k)] * j[static_cast<std::size_t>(k)];
        const double expect = free_ballistic_variance(J, t);
        add("free_ballistic_variance vs Bessel summation",
            std::abs(s2 - expect) / expect, 1e-8);
    }
    {  // dephased uniform chain vs brute-force Lindblad integration, N = 201
        const double J = -1.0, Gamma = 0.5;
        LatticeGeometry geom(0, 100);
        const Hamiltonian ham =
            assemble_hamiltonian(geom, zero_potential(geom), J);
        const DephasingProfile gamma = DephasingProfile::uniform(geom.total_sites(), Gamma);
        IntegratorConfig cfg;
        cfg.dt = 0.02;
        cfg.t_max = 40.0;
        cfg.record_times = {2.0, 5.0, 10.0, 20.0, 40.0};
        const EvolutionRecord rec =
            evolve(initial_density_matrix(geom), ham, gamma, geom, cfg);
        double dev = 0.0;
        for (std::size_t i = 0; i < rec.times.size(); ++i) {
            const double expect = haken_strobl_variance(J, Gamma, rec.times[i]);
            dev = std::max(dev, std::abs(rec.sigma2[i] - expect) / expect);
        }
        add("haken_strobl_variance vs brute-force Lindblad", dev, 1e-4);
    }
    {  // small-t ballistic limit and large-t diffusive slope of the closed form
        const double J = -1.0, Gamma = 0.1;
        const double t_small = 1e-5;
        const double ratio =
            haken_strobl_variance(J, Gamma, t_small) / (2.0 * J * J * t_small * t_small);
        double dev = std::abs(ratio - 1.0) / (Gamma * t_small);  // should be ~1/3
        dev = std::abs(dev - 1.0 / 3.0);
        const double t_late = 20.0 / Gamma, h = 1e-3;
        const double slope = (haken_strobl_variance(J, Gamma, t_late + h) -
                              haken_strobl_variance(J, Gamma, t_late - h)) /
                             (2.0 * h);
        dev = std::max(dev, std::abs(slope - 4.0 * J * J / Gamma) / (4.0 * J * J / Gamma));
        add("haken_strobl_variance limits (2J^2t^2, 4J^2/Gamma)", dev, 1e-3);
    }
    {  // J = 0 off-diagonal decay vs brute-force Lindblad on a random instance
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double t = 0.7;
        IntegratorConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_max = t;
        cfg.record_times = {t};
        cfg.boundary_margin = 1;
        cfg.checkpoint_times = {t};
        // zero hopping is a diagnostic configuration, built directly
        const int n7 = 7;
        Hamiltonian ham7;
        ham7.diagonal.resize(n7);
        ham7.hopping.assign(n7 - 1, 0.0);
        std::vector<double> rates7(n7);
        for (int i = 0; i < n7; ++i) {
            ham7.diagonal[static_cast<std::size_t>(i)] = u(rng);
            rates7[static_cast<std::size_t>(i)] = 0.5 * (u(rng) + 1.0);
        }
        Eigen::MatrixXcd a7(n7, n7);
        for (int i = 0; i < n7; ++i)
            for (int k = 0; k < n7; ++k) a7(i, k) = std::complex<double>(u(rng), u(rng));
        Eigen::MatrixXcd rho7 = a7 * a7.adjoint();
        rho7 /= rho7.trace().real();
        LatticeGeometry geom7(3, 0);
        const EvolutionRecord rec = evolve(rho7, ham7, DephasingProfile::from_table(rates7),
                                           geom7, cfg);
        double dev = 0.0;
        const Eigen::MatrixXcd& rho_t = rec.checkpoints.at(0);
        for (int i = 0; i < n7; ++i) {
            for (int k = 0; k < n7; ++k) {
                // populations are stationary at J = 0; the formula covers n != m
                const std::complex<double> expect =
                    i == k ? rho7(i, i)
                           : static_offdiagonal_decay(
                                 rho7(i, k), ham7.diagonal[static_cast<std::size_t>(i)],
                                 ham7.diagonal[static_cast<std::size_t>(k)],
                                 rates7[static_cast<std::size_t>(i)],
                                 rates7[static_cast<std::size_t>(k)], t);
                dev = std::max(dev, std::abs(rho_t(i, k) - expect));
            }
        }
        add("static_offdiagonal_decay vs brute-force Lindblad", dev, 1e-10);
    }
    return report;
}

}  // namespace qdiff
