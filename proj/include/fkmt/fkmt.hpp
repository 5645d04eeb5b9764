#pragma once

#include "fkmt/errors.hpp"
#include "fkmt/stencil_potential.hpp"
#include "fkmt/lattice_config.hpp"
#include "fkmt/energy.hpp"
#include "fkmt/box_minimizer.hpp"
#include "fkmt/problem_library.hpp"
#include "fkmt/diagnostics.hpp"
#include "fkmt/run_config.hpp"
#include "fkmt/archive.hpp"
#include "fkmt/cli.hpp"
