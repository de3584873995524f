#ifndef LATLAB_LATLAB_HPP
#define LATLAB_LATLAB_HPP

#include "latlab/core.hpp"
#include "latlab/extrapolation.hpp"
#include "latlab/grid.hpp"
#include "latlab/lp.hpp"
#include "latlab/norms.hpp"
#include "latlab/optim.hpp"
#include "latlab/ordered_space.hpp"
#include "latlab/sobolev_grid.hpp"
#include "latlab/span_lattice.hpp"

#endif  // LATLAB_LATLAB_HPP
