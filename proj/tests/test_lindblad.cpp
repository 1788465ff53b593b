#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "qdiff/lindblad.hpp"
#include "qdiff/oracles.hpp"

using namespace qdiff;
using cd = std::complex<double>;

namespace {

// Literal dissipator: -i[H,rho] + sum_i Gamma_i (A_i rho A_i - 1/2 {A_i, rho})
// with A_i = |i><i| built as explicit matrices. The independent reference for
// the fused stencil.
Eigen::MatrixXcd literal_lindblad_rhs(const Eigen::MatrixXcd& rho, const Hamiltonian& ham,
                                      const std::vector<double>& rates) {
    const int n = ham.size();
    const Eigen::MatrixXd hd = ham.dense();
    Eigen::MatrixXcd out = cd(0.0, -1.0) * (hd * rho - rho * hd);
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
        a(i, i) = 1.0;
        out += rates[static_cast<std::size_t>(i)] *
               (a * rho * a - 0.5 * (a * rho + rho * a));
    }
    return out;
}

Eigen::MatrixXcd random_density_matrix(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) a(i, k) = cd(u(rng), u(rng));
    Eigen::MatrixXcd rho = a * a.adjoint();
    rho /= rho.trace().real();
    return rho;
}

Hamiltonian random_hamiltonian(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Hamiltonian h;
    h.diagonal.resize(static_cast<std::size_t>(n));
    h.hopping.resize(static_cast<std::size_t>(n - 1));
    for (auto& v : h.diagonal) v = u(rng);
    for (auto& v : h.hopping) v = u(rng);
    return h;
}

}  // namespace

TEST_CASE("initial state") {
    LatticeGeometry g(2, 0);
    const DensityMatrix rho = initial_density_matrix(g);
    CHECK(rho.rows() == 5);
    CHECK(std::abs(rho.trace() - cd(1.0)) == 0.0);
    CHECK(rho(2, 2) == cd(1.0));
    CHECK(rho.cwiseAbs().sum() == 1.0);
    CHECK(second_moment_of(rho.diagonal().real(), g) == 0.0);
    const Eigen::VectorXcd psi = initial_state_vector(g);
    CHECK(psi(2) == cd(1.0));
    CHECK(psi.squaredNorm() == 1.0);
}

TEST_CASE("rhs matches the literal projector form on random instances") {
    std::mt19937_64 rng(314159);
    std::uniform_int_distribution<int> size(2, 8);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = size(rng);
        const Hamiltonian ham = random_hamiltonian(n, rng);
        std::vector<double> rates(static_cast<std::size_t>(n));
        for (auto& r : rates) r = u(rng);
        const Eigen::MatrixXcd rho = random_density_matrix(n, rng);
        Eigen::MatrixXcd fused(n, n);
        detail::lindblad_rhs_into(rho, ham, DephasingProfile::from_table(rates), fused);
        const Eigen::MatrixXcd expect = literal_lindblad_rhs(rho, ham, rates);
        worst = std::max(worst, (fused - expect).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("rhs structural invariants") {
    std::mt19937_64 rng(99);
    const int n = 7;
    const Hamiltonian ham = random_hamiltonian(n, rng);
    const std::vector<double> rates(n, 0.8);
    const DephasingProfile gp = DephasingProfile::from_table(rates);

    SECTION("traceless for any state") {
        const Eigen::MatrixXcd rho = random_density_matrix(n, rng);
        Eigen::MatrixXcd out(n, n);
        detail::lindblad_rhs_into(rho, ham, gp, out);
        CHECK(std::abs(out.trace()) <= 1e-15);
    }
    SECTION("diagonal rho, dissipator leaves the diagonal untouched") {
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i) rho(i, i) = 1.0 / n;
        Eigen::MatrixXcd out(n, n);
        detail::lindblad_rhs_into(rho, ham, gp, out);
        for (int i = 0; i < n; ++i) CHECK(std::abs(out(i, i)) <= 1e-16);
    }
    SECTION("H = 0: pure exponential damping of off-diagonals only") {
        Hamiltonian h0;
        h0.diagonal.assign(static_cast<std::size_t>(n), 0.0);
        h0.hopping.assign(static_cast<std::size_t>(n - 1), 0.0);
        const Eigen::MatrixXcd rho = random_density_matrix(n, rng);
        Eigen::MatrixXcd out(n, n);
        detail::lindblad_rhs_into(rho, h0, gp, out);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const cd expect = i == k ? cd(0.0) : -0.8 * rho(i, k);
                CHECK(std::abs(out(i, k) - expect) <= 1e-15);
            }
    }
}

TEST_CASE("noiseless density-matrix evolution reproduces the Bessel propagator") {
    LatticeGeometry g(0, 15);
    const Hamiltonian ham = assemble_hamiltonian(g, zero_potential(g), -1.0);
    IntegratorConfig cfg;
    cfg.t_max = 2.0;
    cfg.record_times = {1.0, 2.0};
    cfg.keep_populations = true;
    cfg.boundary_margin = 3;

    const EvolutionRecord dm = evolve(initial_density_matrix(g), ham,
                                      DephasingProfile::uniform(g.total_sites(), 0.0), g, cfg);
    const EvolutionRecord ps = pure_state_evolve(g, ham, cfg);

    REQUIRE(dm.times == cfg.record_times);
    REQUIRE(ps.times == cfg.record_times);
    for (std::size_t r = 0; r < cfg.record_times.size(); ++r) {
        const double t = cfg.record_times[r];
        for (int s = 0; s < g.total_sites(); ++s) {
            const double expect = bessel_free_density(g.physical_index(s), -1.0, t);
            CHECK(std::abs(dm.populations[r](s) - expect) <= 1e-8);
            CHECK(std::abs(ps.populations[r](s) - expect) <= 1e-8);
        }
        CHECK(std::abs(dm.sigma2[r] - ps.sigma2[r]) <= 1e-8);
    }
}

TEST_CASE("conservation and positivity along a noisy run") {
    LatticeGeometry g(3, 12);
    const Hamiltonian ham = assemble_hamiltonian(g, harper_potential(g, 1.5), -1.0);
    IntegratorConfig cfg;
    cfg.t_max = 5.0;
    cfg.record_times = log_record_grid(5.0, 12, 10.0);
    cfg.check_positivity = true;
    const EvolutionRecord rec = evolve(initial_density_matrix(g), ham,
                                       DephasingProfile::uniform(g.total_sites(), 0.1), g, cfg);
    CHECK(rec.max_trace_drift <= 1e-10);
    for (double d : rec.herm_defect) CHECK(d <= 1e-10);
    REQUIRE(rec.min_eigenvalue.size() == rec.times.size());
    for (double ev : rec.min_eigenvalue) CHECK(ev >= -1e-8);
    for (std::size_t i = 0; i < rec.times.size(); ++i)
        CHECK(rec.times[i] == cfg.record_times[i]);
}

TEST_CASE("adaptive step doubling agrees with a fine fixed step") {
    LatticeGeometry g(2, 10);
    const Hamiltonian ham = assemble_hamiltonian(g, harper_potential(g, 1.0), -1.0);
    const DephasingProfile gamma = DephasingProfile::uniform(g.total_sites(), 0.2);

    IntegratorConfig fine;
    fine.dt = 1e-3;
    fine.t_max = 3.0;
    fine.record_times = {1.0, 3.0};
    IntegratorConfig adaptive = fine;
    adaptive.dt = 0.2;  // start coarse, controller must refine
    adaptive.error_control = IntegratorConfig::ErrorControl::StepDoubling;
    adaptive.step_tolerance = 1e-10;

    const EvolutionRecord a = evolve(initial_density_matrix(g), ham, gamma, g, fine);
    const EvolutionRecord b = evolve(initial_density_matrix(g), ham, gamma, g, adaptive);
    for (std::size_t i = 0; i < a.times.size(); ++i)
        CHECK(std::abs(a.sigma2[i] - b.sigma2[i]) <= 1e-6 * std::max(1.0, a.sigma2[i]));
}

TEST_CASE("oversized fixed step fails loudly") {
    LatticeGeometry g(0, 8);
    const Hamiltonian ham = assemble_hamiltonian(g, zero_potential(g), -1.0);
    IntegratorConfig cfg;
    cfg.dt = 5.0;
    cfg.t_max = 50.0;
    cfg.record_times = {50.0};
    cfg.boundary_margin = 2;
    CHECK_THROWS_AS(evolve(initial_density_matrix(g), ham,
                           DephasingProfile::uniform(g.total_sites(), 0.1), g, cfg),
                    IntegrationError);
}

TEST_CASE("boundary guard marks late times invalid") {
    // small lattice, long time: the packet reaches the edge and the guard trips
    LatticeGeometry g(0, 6);
    const Hamiltonian ham = assemble_hamiltonian(g, zero_potential(g), -1.0);
    IntegratorConfig cfg;
    cfg.t_max = 20.0;
    cfg.record_times = {0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
    cfg.boundary_margin = 2;
    const EvolutionRecord rec = pure_state_evolve(g, ham, cfg);
    CHECK(rec.valid_count < rec.times.size());
    CHECK(rec.validity_horizon() < 20.0);
    CHECK(rec.boundary_occ.back() > kBoundaryGuard);
}

TEST_CASE("boundary occupation helper") {
    Eigen::VectorXd p(6);
    p << 0.1, 0.2, 0.0, 0.0, 0.3, 0.4;
    CHECK(boundary_occupation(p, 2) == Catch::Approx(1.0));
    CHECK(boundary_occupation(p, 1) == Catch::Approx(0.5));
    CHECK_THROWS_AS(boundary_occupation(p, 3), ParameterError);
    CHECK_THROWS_AS(boundary_occupation(p, 0), ParameterError);
}

TEST_CASE("default dt heuristic") {
    Hamiltonian h;
    h.diagonal = {0.5, -2.0, 1.0};
    h.hopping = {-1.0, -1.0};
    const DephasingProfile g = DephasingProfile::uniform(3, 0.5);
    CHECK(default_dt(h, g) == Catch::Approx(0.01 / (2.0 + 2.0 + 0.5)).epsilon(1e-15));
}

TEST_CASE("log record grid") {
    const auto ts = log_record_grid(100.0, 10, 100.0);
    REQUIRE(ts.size() == 10);
    CHECK(ts.front() == Catch::Approx(1.0));
    CHECK(ts.back() == 100.0);
    for (std::size_t i = 1; i < ts.size(); ++i) {
        CHECK(ts[i] > ts[i - 1]);
        // constant ratio
        CHECK(ts[i] / ts[i - 1] == Catch::Approx(ts[1] / ts[0]).epsilon(1e-9));
    }
    CHECK_THROWS_AS(log_record_grid(-1.0, 10), ParameterError);
    CHECK_THROWS_AS(log_record_grid(1.0, 1), ParameterError);
}
