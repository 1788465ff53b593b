#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <vector>

#include "qdiff/dephasing.hpp"
#include "qdiff/density_matrix.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/geometry.hpp"
#include "qdiff/hamiltonian.hpp"

namespace qdiff {

inline constexpr double kBoundaryGuard = 1e-6;
inline constexpr double kTraceRenormThreshold = 1e-12;
inline constexpr double kTraceFailThreshold = 1e-6;

struct IntegratorConfig {
    enum class ErrorControl { FixedStep, StepDoubling };

    double dt = 0.0;  // 0 => stability heuristic (see default_dt)
    double t_max = 0.0;
    std::vector<double> record_times;  // strictly increasing, in (0, t_max]
    ErrorControl error_control = ErrorControl::FixedStep;
    double step_tolerance = 1e-8;   // per-step acceptance (step doubling)
    double convergence_tol = 1e-6;  // relative change of sigma2(t_max) under dt halving
    int boundary_margin = 10;
    bool keep_populations = false;
    bool check_positivity = false;           // min-eigenvalue checkpoints (small N)
    std::vector<double> checkpoint_times;    // full rho retained here (<= 8 entries)
};

// dt = 0.01 / (max|V| + 2 max|h| + max Gamma)
inline double default_dt(const Hamiltonian& h, const DephasingProfile& gamma) {
    double vmax = 0.0;
    for (double v : h.diagonal) vmax = std::max(vmax, std::abs(v));
    double hmax = 0.0;
    for (double t : h.hopping) hmax = std::max(hmax, std::abs(t));
    const double scale = vmax + 2.0 * hmax + gamma.max_rate();
    return 0.01 / (scale > 0.0 ? scale : 1.0);
}

// Log-spaced record grid over [t_max/span, t_max].
inline std::vector<double> log_record_grid(double t_max, int points, double span = 100.0) {
    if (t_max <= 0.0) throw ParameterError("t_max must be > 0");
    if (points < 2) throw ParameterError("record grid needs >= 2 points");
    std::vector<double> ts(static_cast<std::size_t>(points));
    const double t0 = t_max / span;
    const double r = std::log(t_max / t0) / (points - 1);
    for (int i = 0; i < points; ++i) ts[static_cast<std::size_t>(i)] = t0 * std::exp(r * i);
    ts.back() = t_max;  // exact endpoint
    return ts;
}

struct EvolutionRecord {
    std::vector<double> times;
    std::vector<double> sigma2;
    std::vector<double> first_moment;
    std::vector<double> trace_drift;   // |tr rho - 1| before renormalization
    std::vector<double> boundary_occ;
    std::vector<double> herm_defect;   // max |rho - rho^dag| before resymmetrization
    std::vector<Eigen::VectorXd> populations;  // kept only if keep_populations
    std::vector<double> min_eigenvalue;        // per record time, if check_positivity
    std::vector<double> checkpoint_times;
    std::vector<Eigen::MatrixXcd> checkpoints;
    std::size_t valid_count = 0;  // record entries before the boundary guard tripped
    double max_trace_drift = 0.0;
    double wall_seconds = 0.0;

    double validity_horizon() const {
        return valid_count == 0 ? 0.0 : times[valid_count - 1];
    }
};

namespace detail {

using cd = std::complex<double>;

// out = -i [H, rho] + D(rho), with H tridiagonal and D the pure-dephasing
// dissipator D(rho)_{nm} = -(Gamma_n + Gamma_m)/2 * rho_{nm} (n != m), 0 on the
// diagonal. Single fused pass over rho, O(N^2).
inline void lindblad_rhs_into(const Eigen::MatrixXcd& rho, const Hamiltonian& ham,
                              const DephasingProfile& gamma, Eigen::MatrixXcd& out) {
    const int n = ham.size();
    const double* d = ham.diagonal.data();
    const double* h = ham.hopping.data();
    const double* g = gamma.rates.data();
    for (int m = 0; m < n; ++m) {
        const cd* c0 = rho.col(m).data();
        const cd* cl = m > 0 ? rho.col(m - 1).data() : nullptr;
        const cd* cr = m + 1 < n ? rho.col(m + 1).data() : nullptr;
        const double dm = d[m];
        const double hl = m > 0 ? h[m - 1] : 0.0;
        const double hr = m + 1 < n ? h[m] : 0.0;
        const double gm = g[m];
        cd* o = out.col(m).data();
        for (int k = 0; k < n; ++k) {
            cd a = (d[k] - dm) * c0[k];
            if (k > 0) a += h[k - 1] * c0[k - 1];
            if (k + 1 < n) a += h[k] * c0[k + 1];
            if (cl) a -= hl * cl[k];
            if (cr) a -= hr * cr[k];
            // -i*a - (g_k + g_m)/2 * rho_km
            o[k] = cd(a.imag(), -a.real()) - 0.5 * (g[k] + gm) * c0[k];
        }
        o[m] += gm * c0[m];  // no damping on the diagonal
    }
}

// -i H psi, tridiagonal, O(N)
inline void schroedinger_rhs_into(const Eigen::VectorXcd& psi, const Hamiltonian& ham,
                                  Eigen::VectorXcd& out) {
    const int n = ham.size();
    const double* d = ham.diagonal.data();
    const double* h = ham.hopping.data();
    const cd* p = psi.data();
    cd* o = out.data();
    for (int k = 0; k < n; ++k) {
        cd a = d[k] * p[k];
        if (k > 0) a += h[k - 1] * p[k - 1];
        if (k + 1 < n) a += h[k] * p[k + 1];
        o[k] = cd(a.imag(), -a.real());
    }
}

// One classical RK4 step y -> y + h/6 (k1 + 2k2 + 2k3 + k4), in place.
template <typename State, typename Rhs>
void rk4_step(State& y, double h, const Rhs& rhs, State& k, State& tmp, State& acc) {
    rhs(y, k);                       // k1
    acc = y + (h / 6.0) * k;
    tmp = y + (h / 2.0) * k;
    rhs(tmp, k);                     // k2
    acc += (h / 3.0) * k;
    tmp = y + (h / 2.0) * k;
    rhs(tmp, k);                     // k3
    acc += (h / 3.0) * k;
    tmp = y + h * k;
    rhs(tmp, k);                     // k4
    acc += (h / 6.0) * k;
    y.swap(acc);
}

inline double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}
inline double max_abs_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace detail

// Sum of populations on the outermost `margin` sites of each lead.
inline double boundary_occupation(const Eigen::VectorXd& populations, int margin) {
    const int n = static_cast<int>(populations.size());
    if (margin <= 0 || 2 * margin >= n) throw ParameterError("bad boundary margin");
    return populations.head(margin).sum() + populations.tail(margin).sum();
}

inline double second_moment_of(const Eigen::VectorXd& populations, const LatticeGeometry& g) {
    const int n = static_cast<int>(populations.size());
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        const double i = g.physical_index(k);
        s += i * i * populations(k);
    }
    return s;
}

inline double first_moment_of(const Eigen::VectorXd& populations, const LatticeGeometry& g) {
    const int n = static_cast<int>(populations.size());
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += g.physical_index(k) * populations(k);
    return s;
}

namespace detail {

template <typename State, typename Rhs, typename Sampler>
void integrate(State& y, const IntegratorConfig& cfg, double dt, const Rhs& rhs,
               const Sampler& sample_at) {
    State k = y, tmp = y, acc = y;
    double t = 0.0;
    std::size_t next_record = 0;
    const auto& rec = cfg.record_times;
    // records at t = 0 (grids normally start at t > 0)
    while (next_record < rec.size() && rec[next_record] <= 0.0) {
        sample_at(rec[next_record], y);
        ++next_record;
    }
    double h_ctrl = dt;  // adaptive controller state
    State y1, ytmp;
    const bool adaptive = cfg.error_control == IntegratorConfig::ErrorControl::StepDoubling;
    if (adaptive) {
        y1 = y;
        ytmp = y;
    }
    while (t < cfg.t_max - 1e-14 * cfg.t_max) {
        double target = cfg.t_max;
        if (next_record < rec.size()) target = std::min(target, rec[next_record]);
        double h = std::min(adaptive ? h_ctrl : dt, target - t);
        bool hit = t + h >= target - 1e-14 * cfg.t_max;
        if (hit) h = target - t;  // land exactly on the record time

        if (!adaptive) {
            rk4_step(y, h, rhs, k, tmp, acc);
        } else {
            for (;;) {
                y1 = y;
                rk4_step(y1, h, rhs, k, tmp, acc);  // one full step
                ytmp = y;
                rk4_step(ytmp, h / 2.0, rhs, k, tmp, acc);
                rk4_step(ytmp, h / 2.0, rhs, k, tmp, acc);
                const double err = max_abs_diff(y1, ytmp);
                if (err <= cfg.step_tolerance || h <= 1e-12) {
                    y.swap(ytmp);
                    const double grow =
                        err > 0.0 ? 0.9 * std::pow(cfg.step_tolerance / err, 0.2) : 2.0;
                    h_ctrl = h * std::clamp(grow, 0.2, 2.0);
                    break;
                }
                h /= 2.0;
                hit = false;
            }
        }
        t += h;
        if (hit && next_record < rec.size() && target == rec[next_record]) {
            t = rec[next_record];  // avoid drift accumulation on the grid
            sample_at(t, y);
            ++next_record;
        }
    }
}

}  // namespace detail

// Density-matrix evolution under the dephasing master equation.
inline EvolutionRecord evolve(const DensityMatrix& rho0, const Hamiltonian& ham,
                              const DephasingProfile& gamma, const LatticeGeometry& geom,
                              const IntegratorConfig& cfg) {
    const int n = ham.size();
    if (rho0.rows() != n || rho0.cols() != n || gamma.size() != n)
        throw StructuralError("evolve: shape mismatch");
    const double dt = cfg.dt > 0.0 ? cfg.dt : default_dt(ham, gamma);
    const auto t_start = std::chrono::steady_clock::now();

    EvolutionRecord rec;
    DensityMatrix rho = rho0;
    bool guard_tripped = false;

    auto rhs = [&](const DensityMatrix& y, DensityMatrix& out) {
        detail::lindblad_rhs_into(y, ham, gamma, out);
    };

    // per-step cleanup: resymmetrize, renormalize trace, detect blow-up
    auto cleanup = [&](DensityMatrix& y, double t) -> double {
        const std::complex<double> tr = y.trace();
        if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag()))
            throw IntegrationError("non-finite state during integration", t);
        const double drift = std::abs(tr - std::complex<double>(1.0, 0.0));
        if (drift > kTraceFailThreshold)
            throw IntegrationError("trace drift exceeded 1e-6 (dt too large?)", t);
        rec.max_trace_drift = std::max(rec.max_trace_drift, drift);
        y = 0.5 * (y + y.adjoint().eval());
        if (drift > kTraceRenormThreshold) y /= tr.real();
        return drift;
    };

    auto sampler = [&](double t, DensityMatrix& y) {
        const double defect = (y - y.adjoint().eval()).cwiseAbs().maxCoeff();
        const double drift = cleanup(y, t);
        Eigen::VectorXd pops = y.diagonal().real();
        if (!pops.allFinite()) throw IntegrationError("non-finite populations", t);
        const double bocc = boundary_occupation(pops, cfg.boundary_margin);
        rec.times.push_back(t);
        rec.sigma2.push_back(second_moment_of(pops, geom));
        rec.first_moment.push_back(first_moment_of(pops, geom));
        rec.trace_drift.push_back(drift);
        rec.boundary_occ.push_back(bocc);
        rec.herm_defect.push_back(defect);
        if (cfg.keep_populations) rec.populations.push_back(pops);
        if (cfg.check_positivity) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(y, Eigen::EigenvaluesOnly);
            rec.min_eigenvalue.push_back(es.eigenvalues().minCoeff());
        }
        for (double tc : cfg.checkpoint_times) {
            if (std::abs(tc - t) <= 1e-12 * std::max(1.0, t)) {
                rec.checkpoint_times.push_back(t);
                rec.checkpoints.push_back(y);
            }
        }
        if (!guard_tripped) {
            if (bocc > kBoundaryGuard)
                guard_tripped = true;
            else
                rec.valid_count = rec.times.size();
        }
    };

    // integrate with cleanup applied after every accepted step
    {
        DensityMatrix k = rho, tmp = rho, acc = rho;
        double t = 0.0;
        std::size_t next_record = 0;
        const auto& rts = cfg.record_times;
        while (next_record < rts.size() && rts[next_record] <= 0.0) {
            sampler(rts[next_record], rho);
            ++next_record;
        }
        double h_ctrl = dt;
        DensityMatrix y1, ytmp;
        const bool adaptive = cfg.error_control == IntegratorConfig::ErrorControl::StepDoubling;
        while (t < cfg.t_max - 1e-14 * cfg.t_max) {
            double target = cfg.t_max;
            if (next_record < rts.size()) target = std::min(target, rts[next_record]);
            double h = std::min(adaptive ? h_ctrl : dt, target - t);
            bool hit = t + h >= target - 1e-14 * cfg.t_max;
            if (hit) h = target - t;
            if (!adaptive) {
                detail::rk4_step(rho, h, rhs, k, tmp, acc);
            } else {
                for (;;) {
                    y1 = rho;
                    detail::rk4_step(y1, h, rhs, k, tmp, acc);
                    ytmp = rho;
                    detail::rk4_step(ytmp, h / 2.0, rhs, k, tmp, acc);
                    detail::rk4_step(ytmp, h / 2.0, rhs, k, tmp, acc);
                    const double err = detail::max_abs_diff(y1, ytmp);
                    if (err <= cfg.step_tolerance || h <= 1e-12) {
                        rho.swap(ytmp);
                        const double grow =
                            err > 0.0 ? 0.9 * std::pow(cfg.step_tolerance / err, 0.2) : 2.0;
                        h_ctrl = h * std::clamp(grow, 0.2, 2.0);
                        break;
                    }
                    h /= 2.0;
                    hit = false;
                }
            }
            t += h;
            if (hit && next_record < rts.size() && target == rts[next_record]) {
                t = rts[next_record];
                sampler(t, rho);
                ++next_record;
            } else {
                cleanup(rho, t);
            }
        }
    }

    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rec;
}

// Noiseless fast path: evolves the amplitude vector under i d/dt psi = H psi,
// O(N) per RHS. Populations are |psi_n|^2.
inline EvolutionRecord pure_state_evolve(const LatticeGeometry& geom, const Hamiltonian& ham,
                                         const IntegratorConfig& cfg) {
    const int n = ham.size();
    if (geom.total_sites() != n) throw StructuralError("pure_state_evolve: shape mismatch");
    const double dt =
        cfg.dt > 0.0 ? cfg.dt : default_dt(ham, DephasingProfile::uniform(n, 0.0));
    const auto t_start = std::chrono::steady_clock::now();

    EvolutionRecord rec;
    Eigen::VectorXcd psi = initial_state_vector(geom);
    bool guard_tripped = false;

    auto rhs = [&](const Eigen::VectorXcd& y, Eigen::VectorXcd& out) {
        detail::schroedinger_rhs_into(y, ham, out);
    };

    auto sampler = [&](double t, Eigen::VectorXcd& y) {
        const double norm2 = y.squaredNorm();
        if (!std::isfinite(norm2)) throw IntegrationError("non-finite state", t);
        const double drift = std::abs(norm2 - 1.0);
        if (drift > kTraceFailThreshold)
            throw IntegrationError("norm drift exceeded 1e-6 (dt too large?)", t);
        rec.max_trace_drift = std::max(rec.max_trace_drift, drift);
        if (drift > kTraceRenormThreshold) y /= std::sqrt(norm2);
        Eigen::VectorXd pops = y.cwiseAbs2();
        const double bocc = boundary_occupation(pops, cfg.boundary_margin);
        rec.times.push_back(t);
        rec.sigma2.push_back(second_moment_of(pops, geom));
        rec.first_moment.push_back(first_moment_of(pops, geom));
        rec.trace_drift.push_back(drift);
        rec.boundary_occ.push_back(bocc);
        rec.herm_defect.push_back(0.0);
        if (cfg.keep_populations) rec.populations.push_back(pops);
        if (!guard_tripped) {
            if (bocc > kBoundaryGuard)
                guard_tripped = true;
            else
                rec.valid_count = rec.times.size();
        }
    };

    detail::integrate(psi, cfg, dt, rhs, sampler);

    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rec;
}

}  // namespace qdiff
