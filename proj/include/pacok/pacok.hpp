#pragma once

#include "pacok/analysis.hpp"
#include "pacok/config.hpp"
#include "pacok/csv.hpp"
#include "pacok/errors.hpp"
#include "pacok/grid.hpp"
#include "pacok/model.hpp"
#include "pacok/snapshot.hpp"
#include "pacok/solver.hpp"
#include "pacok/spectral.hpp"
