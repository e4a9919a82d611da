#pragma once

#include "epstein/error.hpp"
#include "epstein/integer_matrix.hpp"
#include "epstein/lattice.hpp"
#include "epstein/special_functions.hpp"
#include "epstein/summation.hpp"
#include "epstein/stability.hpp"
#include "epstein/decomposition.hpp"
#include "epstein/laplacian.hpp"
#include "epstein/verify.hpp"
