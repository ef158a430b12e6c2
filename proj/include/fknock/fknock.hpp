#pragma once

#include "fknock/basis.hpp"
#include "fknock/csv_io.hpp"
#include "fknock/diagnostics.hpp"
#include "fknock/filter.hpp"
#include "fknock/fpca.hpp"
#include "fknock/grouplasso.hpp"
#include "fknock/knockoff.hpp"
#include "fknock/linalg.hpp"
#include "fknock/pipeline.hpp"
#include "fknock/rng.hpp"
#include "fknock/simgen.hpp"
#include "fknock/smoothing.hpp"
