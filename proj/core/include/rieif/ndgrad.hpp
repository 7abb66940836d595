#pragma once

#include "rieif/ndgrad/array.hpp"
#include "rieif/ndgrad/gradcheck.hpp"
#include "rieif/ndgrad/ops.hpp"
#include "rieif/ndgrad/optim.hpp"
#include "rieif/ndgrad/tape.hpp"
