#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qdiff/dephasing.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/geometry.hpp"
#include "qdiff/hamiltonian.hpp"
#include "qdiff/lindblad.hpp"
#include "qdiff/observables.hpp"
#include "qdiff/potential.hpp"
#include "qdiff/rng.hpp"

namespace qdiff {

struct EnsembleSpec {
    LatticeGeometry geometry;
    double disorder_V = 1.0;  // +-V amplitude of each realization
    double hopping_J = -1.0;
    DephasingProfile gamma;
    IntegratorConfig integrator;
    int realization_count = 1;
    std::uint64_t master_seed = 0;
    int workers = 1;

    std::uint64_t seed_for(int k) const {
        return derive_seed(master_seed, static_cast<std::uint64_t>(k));
    }
};

struct EnsembleResult {
    MomentSeries averaged;
    std::vector<EvolutionRecord> records;   // per realization, in seed order
    std::vector<std::uint64_t> seeds;
    std::vector<PotentialProfile> potentials;
};

// Runs realization k of the spec (disordered potential from seed_k).
inline EvolutionRecord run_realization(const EnsembleSpec& spec,
                                       const PotentialProfile& potential) {
    const Hamiltonian ham = assemble_hamiltonian(spec.geometry, potential, spec.hopping_J);
    if (spec.gamma.is_zero())
        return pure_state_evolve(spec.geometry, ham, spec.integrator);
    const DensityMatrix rho0 = initial_density_matrix(spec.geometry);
    return evolve(rho0, ham, spec.gamma, spec.geometry, spec.integrator);
}

// Independent realizations on a bounded worker pool; the mean is taken in seed
// order, so the averaged series does not depend on completion order.
inline EnsembleResult run_ensemble(const EnsembleSpec& spec) {
    if (spec.realization_count < 1) throw ParameterError("realization_count must be >= 1");
    const int nr = spec.realization_count;

    EnsembleResult result;
    result.seeds.resize(static_cast<std::size_t>(nr));
    result.potentials.resize(static_cast<std::size_t>(nr));
    result.records.resize(static_cast<std::size_t>(nr));
    for (int k = 0; k < nr; ++k) {
        result.seeds[static_cast<std::size_t>(k)] = spec.seed_for(k);
        result.potentials[static_cast<std::size_t>(k)] = disordered_potential(
            spec.geometry, spec.disorder_V, result.seeds[static_cast<std::size_t>(k)]);
    }

    std::atomic<int> next{0};
    std::mutex fail_mutex;
    std::optional<std::pair<std::uint64_t, std::string>> failure;

    auto worker = [&] {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= nr) return;
            {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (failure) return;
            }
            try {
                result.records[static_cast<std::size_t>(k)] =
                    run_realization(spec, result.potentials[static_cast<std::size_t>(k)]);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (!failure)
                    failure = {result.seeds[static_cast<std::size_t>(k)], e.what()};
                return;
            }
        }
    };

    const int nw = std::max(1, std::min(spec.workers, nr));
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nw));
        for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure)
        throw IntegrationError("realization with seed " + std::to_string(failure->first) +
                                   " failed: " + failure->second,
                               0.0);

    // arithmetic mean in fixed seed order; horizon = minimum over realizations
    MomentSeries avg;
    avg.times = result.records[0].times;
    avg.sigma2.assign(avg.times.size(), 0.0);
    avg.source = "ensemble-average";
    avg.realization_count = nr;
    avg.validity_horizon = result.records[0].validity_horizon();
    for (int k = 0; k < nr; ++k) {
        const auto& r = result.records[static_cast<std::size_t>(k)];
        if (r.times.size() != avg.times.size())
            throw StructuralError("realizations disagree on the record grid");
        for (std::size_t i = 0; i < avg.sigma2.size(); ++i) avg.sigma2[i] += r.sigma2[i];
        avg.validity_horizon = std::min(avg.validity_horizon, r.validity_horizon());
    }
    for (double& v : avg.sigma2) v /= nr;
    result.averaged = std::move(avg);
    return result;
}

}  // namespace qdiff
