#pragma once

#include "hdconc/error.hpp"
#include "hdconc/gauss_bounds.hpp"
#include "hdconc/linalg.hpp"
#include "hdconc/mc.hpp"
#include "hdconc/quadrature.hpp"
#include "hdconc/report.hpp"
#include "hdconc/rng.hpp"
#include "hdconc/statapps.hpp"
#include "hdconc/tensor3.hpp"
#include "hdconc/tensor_bounds.hpp"
#include "hdconc/verify.hpp"
