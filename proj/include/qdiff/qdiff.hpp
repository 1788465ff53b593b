#pragma once

#include "qdiff/config.hpp"
#include "qdiff/dephasing.hpp"
#include "qdiff/density_matrix.hpp"
#include "qdiff/ensemble.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/geometry.hpp"
#include "qdiff/hamiltonian.hpp"
#include "qdiff/lindblad.hpp"
#include "qdiff/observables.hpp"
#include "qdiff/oracle_selftest.hpp"
#include "qdiff/oracles.hpp"
#include "qdiff/potential.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/run_output.hpp"
#include "qdiff/simulate.hpp"
