#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qdiff/config.hpp"
#include "qdiff/ensemble.hpp"
#include "qdiff/observables.hpp"
#include "qdiff/run_output.hpp"

namespace qdiff {

struct ResolvedRun {
    RunConfig config;  // dt / lead_length / realizations resolved to actual values
    LatticeGeometry geometry;
    DephasingProfile gamma;
    IntegratorConfig integrator;
};

inline ResolvedRun resolve_run(const RunConfig& cin) {
    RunConfig c = cin;
    const int lead =
        c.lead_length >= 0 ? c.lead_length : auto_lead_length(c.hopping_J, c.t_max);
    c.lead_length = lead;
    LatticeGeometry geom(c.model.L, lead);
    const int n = geom.total_sites();

    DephasingProfile gamma = c.gamma_table.empty()
                                 ? DephasingProfile::uniform(n, c.gamma)
                                 : DephasingProfile::from_table(c.gamma_table);
    if (gamma.size() != n)
        throw ConfigError("gamma table length " + std::to_string(gamma.size()) +
                          " does not match total_sites " + std::to_string(n));

    if (c.dt <= 0.0) {
        double vmax = 0.0;
        if (c.model.kind == "disordered") vmax = c.model.V;
        if (c.model.kind == "harper") vmax = std::abs(c.model.Delta);
        c.dt = 0.01 / (vmax + 2.0 * std::abs(c.hopping_J) + gamma.max_rate());
    }
    if (c.realizations < 0) c.realizations = c.model.kind == "disordered" ? 20 : 1;

    IntegratorConfig icfg;
    icfg.dt = c.dt;
    icfg.t_max = c.t_max;
    icfg.record_times = log_record_grid(c.t_max, c.record_points, c.record_span);
    icfg.error_control = c.error_control == "adaptive"
                             ? IntegratorConfig::ErrorControl::StepDoubling
                             : IntegratorConfig::ErrorControl::FixedStep;
    icfg.step_tolerance = c.step_tolerance;
    icfg.convergence_tol = c.convergence_tol;
    icfg.boundary_margin = c.boundary_margin;
    icfg.keep_populations = c.keep_populations;
    icfg.check_positivity = c.check_positivity;
    icfg.checkpoint_times = c.checkpoint_times;
    return {std::move(c), geom, std::move(gamma), std::move(icfg)};
}

struct SimulationOutcome {
    ResolvedRun resolved;
    MomentSeries series;  // averaged for ensembles
    std::vector<EvolutionRecord> records;
    std::vector<std::uint64_t> seeds;
    std::optional<PotentialProfile> potential;  // single-run only
    std::optional<ExponentFit> fit;
    std::string regime;
    bool guard_clean = true;  // false once the boundary guard invalidated times
    std::string fit_failure;  // empty when fit succeeded
};

inline PotentialProfile build_potential(const ResolvedRun& r, std::uint64_t seed) {
    const auto& m = r.config.model;
    if (m.kind == "disordered") return disordered_potential(r.geometry, m.V, seed);
    if (m.kind == "harper") return harper_potential(r.geometry, m.Delta, m.beta, m.phi);
    return zero_potential(r.geometry);
}

inline SimulationOutcome run_simulation(const RunConfig& cin) {
    SimulationOutcome out;
    out.resolved = resolve_run(cin);
    const ResolvedRun& r = out.resolved;
    const RunConfig& c = r.config;

    if (c.model.kind == "disordered") {
        EnsembleSpec spec;
        spec.geometry = r.geometry;
        spec.disorder_V = c.model.V;
        spec.hopping_J = c.hopping_J;
        spec.gamma = r.gamma;
        spec.integrator = r.integrator;
        spec.realization_count = c.realizations;
        spec.master_seed = c.master_seed;
        spec.workers = c.workers;
        EnsembleResult res = run_ensemble(spec);
        out.series = std::move(res.averaged);
        out.records = std::move(res.records);
        out.seeds = std::move(res.seeds);
        if (out.records.size() == 1) out.potential = std::move(res.potentials[0]);
    } else {
        // free / harper potentials are deterministic: one run is the ensemble
        PotentialProfile pot = build_potential(r, c.master_seed);
        const Hamiltonian ham = assemble_hamiltonian(r.geometry, pot, c.hopping_J);
        EvolutionRecord rec =
            r.gamma.is_zero() ? pure_state_evolve(r.geometry, ham, r.integrator)
                              : evolve(initial_density_matrix(r.geometry), ham, r.gamma,
                                       r.geometry, r.integrator);
        out.series = MomentSeries::from_record(rec);
        out.records.push_back(std::move(rec));
        out.potential = std::move(pot);
    }

    out.guard_clean = out.series.validity_horizon >= out.series.times.back();

    FitWindow window;
    if (c.fit_t_lo > 0.0 && c.fit_t_hi > 0.0)
        window = {c.fit_t_lo, c.fit_t_hi};
    else
        window = default_fit_window(out.series);
    try {
        out.fit = fit_power_law(out.series, window);
        out.regime = to_string(classify_regime(out.fit->nu, c.fit_epsilon));
    } catch (const ParameterError& e) {
        out.fit_failure = e.what();
    }
    return out;
}

inline json metadata_json(const SimulationOutcome& out) {
    const ResolvedRun& r = out.resolved;
    json meta;
    meta["config"] = to_json(r.config);
    json derived;
    derived["total_sites"] = r.geometry.total_sites();
    derived["center_index"] = r.geometry.center_index();
    derived["lead_length"] = r.geometry.lead_length;
    derived["dt"] = r.config.dt;
    derived["seeds"] = out.seeds;
    json npd = json::array();
    if (r.config.model.kind == "disordered") {
        // the source model leaves these unspecified; they are artifact choices
        npd.push_back("model.V");
        npd.push_back("model.L");
        npd.push_back("ensemble.realizations");
    }
    derived["non_paper_defaults"] = npd;
    meta["derived"] = derived;

    json results;
    results["validity_horizon"] = out.series.validity_horizon;
    results["guard_clean"] = out.guard_clean;
    double max_drift = 0.0, wall = 0.0;
    for (const auto& rec : out.records) {
        max_drift = std::max(max_drift, rec.max_trace_drift);
        wall += rec.wall_seconds;
    }
    results["max_trace_drift"] = max_drift;
    results["wall_seconds"] = wall;
    if (out.fit) {
        results["fit"] = {{"nu", out.fit->nu},
                          {"log_prefactor", out.fit->log_prefactor},
                          {"window", {out.fit->window.t_lo, out.fit->window.t_hi}},
                          {"rms_residual", out.fit->rms_residual},
                          {"point_count", out.fit->point_count},
                          {"regime", out.regime}};
    } else {
        results["fit"] = nullptr;
        results["fit_failure"] = out.fit_failure;
    }
    meta["results"] = results;
    return meta;
}

inline void write_record_csv(const fs::path& path, const EvolutionRecord& rec,
                             const LatticeGeometry& geom) {
    CsvWriter csv(path);
    csv.header({"t", "sigma2", "first_moment", "trace_drift", "boundary_occ"});
    for (std::size_t i = 0; i < rec.times.size(); ++i)
        csv.row({rec.times[i], rec.sigma2[i], rec.first_moment[i], rec.trace_drift[i],
                 rec.boundary_occ[i]});
    (void)geom;
}

inline void write_potential_csv(const fs::path& path, const PotentialProfile& pot,
                                const LatticeGeometry& geom) {
    CsvWriter csv(path);
    csv.header({"site", "V"});
    for (int s = 0; s < geom.total_sites(); ++s)
        csv.row({static_cast<double>(geom.physical_index(s)),
                 pot.values[static_cast<std::size_t>(s)]});
}

// Writes the run directory (atomically) and returns the outcome.
inline SimulationOutcome simulate(const RunConfig& cin, const fs::path& out_dir) {
    SimulationOutcome out = run_simulation(cin);
    const ResolvedRun& r = out.resolved;

    AtomicRunDir dir(out_dir);
    write_json_file(dir.path() / "metadata.json", metadata_json(out));

    if (out.records.size() > 1) {
        CsvWriter csv(dir.path() / "variance.csv");
        csv.header({"t", "sigma2"});
        for (std::size_t i = 0; i < out.series.times.size(); ++i)
            csv.row({out.series.times[i], out.series.sigma2[i]});
        fs::create_directories(dir.path() / "realizations");
        for (std::size_t k = 0; k < out.records.size(); ++k) {
            char name[32];
            std::snprintf(name, sizeof(name), "r%03zu.csv", k);
            write_record_csv(dir.path() / "realizations" / name, out.records[k], r.geometry);
        }
    } else {
        write_record_csv(dir.path() / "variance.csv", out.records[0], r.geometry);
    }
    if (out.potential) write_potential_csv(dir.path() / "potential.csv", *out.potential, r.geometry);

    if (out.fit) {
        write_json_file(dir.path() / "fit.json",
                        metadata_json(out)["results"]["fit"]);
        CsvWriter plot(dir.path() / "plot.csv");
        plot.header({"log10_t", "log10_sigma2", "log10_fit"});
        for (std::size_t i = 0; i < out.series.times.size(); ++i) {
            const double t = out.series.times[i];
            const double s2 = out.series.sigma2[i];
            if (t <= 0.0 || s2 <= 0.0) continue;
            plot.row({std::log10(t), std::log10(s2), out.fit->model_log10_sigma2(t)});
        }
    }
    dir.commit();
    return out;
}

struct SweepRow {
    double axis_value = 0.0;
    SimulationOutcome outcome;
};

// Runs simulate once per axis value (shared seeds) and writes a summary table.
inline std::vector<SweepRow> sweep(const RunConfig& base, const std::string& axis,
                                   const std::vector<double>& values,
                                   const fs::path& out_dir) {
    if (values.empty()) throw ConfigError("sweep: empty axis value list");
    if (axis != "gamma" && axis != "Delta" && axis != "V")
        throw ConfigError("sweep: axis must be gamma|Delta|V");

    std::vector<SweepRow> rows;
    AtomicRunDir dir(out_dir);
    CsvWriter summary(dir.path() / "summary.csv");
    summary.header({"model", "V", "Delta", "gamma", "nu", "rms_residual", "window_lo",
                    "window_hi", "regime"});
    for (std::size_t i = 0; i < values.size(); ++i) {
        RunConfig c = base;
        if (axis == "gamma") {
            c.gamma = values[i];
            c.gamma_table.clear();
        } else if (axis == "Delta") {
            c.model.Delta = values[i];
        } else {
            c.model.V = values[i];
        }
        char name[32];
        std::snprintf(name, sizeof(name), "run_%03zu", i);
        SimulationOutcome out = simulate(c, dir.path() / name);
        const auto& m = out.resolved.config.model;
        std::vector<std::string> cells = {m.kind, fmt_g17(m.V), fmt_g17(m.Delta),
                                          fmt_g17(out.resolved.config.gamma)};
        if (out.fit) {
            cells.push_back(fmt_g17(out.fit->nu));
            cells.push_back(fmt_g17(out.fit->rms_residual));
            cells.push_back(fmt_g17(out.fit->window.t_lo));
            cells.push_back(fmt_g17(out.fit->window.t_hi));
            cells.push_back(out.regime);
        } else {
            cells.insert(cells.end(), {"nan", "nan", "nan", "nan", "none"});
        }
        summary.row_strings(cells);
        rows.push_back({values[i], std::move(out)});
    }
    dir.commit();
    return rows;
}

// Relative change of sigma2(t_max) when the step is halved. Used by verify()
// and the convergence tests.
inline double step_convergence_change(const RunConfig& cin) {
    RunConfig c = resolve_run(cin).config;  // pin dt before halving
    RunConfig ch = c;
    ch.dt = c.dt / 2.0;
    const SimulationOutcome a = run_simulation(c);
    const SimulationOutcome b = run_simulation(ch);
    const double sa = a.series.sigma2.back();
    const double sb = b.series.sigma2.back();
    return std::abs(sa - sb) / std::max(std::abs(sb), 1e-300);
}

}  // namespace qdiff
