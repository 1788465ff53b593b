// qdiff — wave-packet spreading on noisy tight-binding chains.
//
// Subcommands:
//   simulate  run one model configuration (ensemble if requested) and fit
//   sweep     run simulate once per axis value, emit a summary table
//   verify    oracle self-tests plus a step-convergence smoke test
//   oracle    closed-form oracle self-tests with max deviations

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdiff/qdiff.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitValidity = 4;

void emit_error(const std::string& type, const std::string& message, int code) {
    nlohmann::json j;
    j["error"] = {{"type", type}, {"message", message}, {"exit_code", code}};
    std::cerr << j.dump() << "\n";
}

void print_outcome(const qdiff::SimulationOutcome& out, const std::string& dir) {
    std::printf("run: %s  model=%s  gamma=%s  N=%d\n", dir.c_str(),
                out.resolved.config.model.kind.c_str(),
                qdiff::fmt_g17(out.resolved.config.gamma).c_str(),
                out.resolved.geometry.total_sites());
    if (out.fit) {
        std::printf("  nu=%.4f  residual=%.4f  window=[%g, %g]  regime=%s\n", out.fit->nu,
                    out.fit->rms_residual, out.fit->window.t_lo, out.fit->window.t_hi,
                    out.regime.c_str());
    } else {
        std::printf("  fit unavailable: %s\n", out.fit_failure.c_str());
    }
    if (!out.guard_clean)
        std::printf("  warning: boundary guard tripped at t=%g; later times invalid\n",
                    out.series.validity_horizon);
}

int print_oracle_report(const qdiff::OracleReport& report) {
    std::printf("%-55s %-12s %-12s %s\n", "oracle", "max_dev", "tolerance", "status");
    for (const auto& c : report.checks)
        std::printf("%-55s %-12.3e %-12.3e %s\n", c.name.c_str(), c.max_deviation,
                    c.tolerance, c.pass ? "PASS" : "FAIL");
    return report.all_pass() ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wave-packet spreading on 1D tight-binding chains with dephasing noise"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis = "gamma";
    std::vector<double> axis_values;
    int workers = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double tol_scale = 1.0;

    auto* sim = app.add_subcommand("simulate", "run one configuration");
    sim->add_option("--config", config_path, "JSON config file")->required();
    sim->add_option("--out", out_dir, "output directory (overrides config)");
    sim->add_option("--workers", workers, "ensemble worker threads");
    sim->add_option("--seed", seed, "master seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });

    auto* swp = app.add_subcommand("sweep", "run simulate per axis value");
    swp->add_option("--config", config_path, "JSON config template")->required();
    swp->add_option("--axis", axis, "sweep axis: gamma|Delta|V");
    swp->add_option("--values", axis_values, "axis values")->required()->delimiter(',');
    swp->add_option("--out", out_dir, "output directory (overrides config)");
    swp->add_option("--workers", workers, "ensemble worker threads");
    swp->add_option("--seed", seed, "master seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });

    auto* ver = app.add_subcommand("verify", "post-install smoke test");
    ver->add_option("--tolerance-scale", tol_scale,
                    "scale factor on oracle tolerances (test hook)");

    auto* orc = app.add_subcommand("oracle", "closed-form oracle self-tests");
    orc->add_option("--tolerance-scale", tol_scale,
                    "scale factor on oracle tolerances (test hook)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed() || swp->parsed()) {
            qdiff::RunConfig cfg = qdiff::load_config_file(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (workers > 0) cfg.workers = workers;
            if (seed_set) cfg.master_seed = seed;

            if (sim->parsed()) {
                const auto out = qdiff::simulate(cfg, cfg.output_dir);
                print_outcome(out, cfg.output_dir);
                if (!out.fit) {
                    if (!out.guard_clean) {
                        emit_error("validity_guard",
                                   "fit refused: boundary guard invalidated the window",
                                   kExitValidity);
                        return kExitValidity;
                    }
                    emit_error("config", out.fit_failure, kExitConfig);
                    return kExitConfig;
                }
                return kExitOk;
            }

            const auto rows = qdiff::sweep(cfg, axis, axis_values, cfg.output_dir);
            std::printf("sweep over %s (%zu values) -> %s/summary.csv\n", axis.c_str(),
                        rows.size(), cfg.output_dir.c_str());
            for (const auto& row : rows) {
                std::printf("%s=%-10g ", axis.c_str(), row.axis_value);
                if (row.outcome.fit)
                    std::printf("nu=%.4f regime=%s\n", row.outcome.fit->nu,
                                row.outcome.regime.c_str());
                else
                    std::printf("fit unavailable\n");
            }
            return kExitOk;
        }

        if (orc->parsed()) return print_oracle_report(qdiff::run_oracle_selftests(tol_scale));

        // verify: oracles plus step convergence on a small standard configuration
        const auto report = qdiff::run_oracle_selftests(tol_scale);
        int rc = print_oracle_report(report);
        qdiff::RunConfig small;
        small.model.kind = "harper";
        small.model.L = 10;
        small.model.Delta = 1.5;
        small.gamma = 0.04;
        small.t_max = 10.0;
        small.record_points = 20;
        const double change = qdiff::step_convergence_change(small);
        const double tol = small.convergence_tol * tol_scale;
        const bool conv_ok = change <= tol;
        std::printf("%-55s %-12.3e %-12.3e %s\n", "step convergence (default dt, halved)",
                    change, tol, conv_ok ? "PASS" : "FAIL");
        if (!conv_ok) rc = kExitNumerical;
        std::printf("verify: %s\n", rc == kExitOk ? "ALL PASS" : "FAILURES");
        return rc;
    } catch (const qdiff::ConfigError& e) {
        emit_error("config", e.what(), kExitConfig);
        return kExitConfig;
    } catch (const qdiff::ParameterError& e) {
        emit_error("config", e.what(), kExitConfig);
        return kExitConfig;
    } catch (const qdiff::StructuralError& e) {
        emit_error("config", e.what(), kExitConfig);
        return kExitConfig;
    } catch (const qdiff::IntegrationError& e) {
        emit_error("numerical", e.what(), kExitNumerical);
        return kExitNumerical;
    } catch (const qdiff::ValidityError& e) {
        emit_error("validity_guard", e.what(), kExitValidity);
        return kExitValidity;
    } catch (const std::exception& e) {
        emit_error("internal", e.what(), kExitNumerical);
        return kExitNumerical;
    }
}
