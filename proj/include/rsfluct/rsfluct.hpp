#pragma once

#include "rsfluct/acceptance.hpp"
#include "rsfluct/analytic_series.hpp"
#include "rsfluct/combinatorics.hpp"
#include "rsfluct/distribution.hpp"
#include "rsfluct/expansion.hpp"
#include "rsfluct/io.hpp"
#include "rsfluct/lattice_path.hpp"
#include "rsfluct/montecarlo.hpp"
#include "rsfluct/multi_index.hpp"
#include "rsfluct/numeric.hpp"
#include "rsfluct/potential.hpp"
#include "rsfluct/statistics.hpp"
#include "rsfluct/symbolic.hpp"
#include "rsfluct/tridiagonal.hpp"
#include "rsfluct/verify.hpp"
