#pragma once

// Umbrella header for the nonreciprocal-bundle simulator library.

#include "nrb/config.hpp"
#include "nrb/correlations.hpp"
#include "nrb/csv.hpp"
#include "nrb/entanglement.hpp"
#include "nrb/errors.hpp"
#include "nrb/hilbert.hpp"
#include "nrb/liouvillian.hpp"
#include "nrb/model.hpp"
#include "nrb/ode.hpp"
#include "nrb/parallel.hpp"
#include "nrb/rng.hpp"
#include "nrb/scenarios.hpp"
#include "nrb/trajectories.hpp"
#include "nrb/version.hpp"
