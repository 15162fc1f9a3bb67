#pragma once

#include "rfm/assembly.hpp"
#include "rfm/envelope.hpp"
#include "rfm/errors.hpp"
#include "rfm/expression.hpp"
#include "rfm/features.hpp"
#include "rfm/oracle.hpp"
#include "rfm/problem.hpp"
#include "rfm/quadrature.hpp"
#include "rfm/rng.hpp"
#include "rfm/solver.hpp"
#include "rfm/spectra.hpp"
