#pragma once

#include "npspec/assembly.hpp"
#include "npspec/config.hpp"
#include "npspec/errors.hpp"
#include "npspec/frame.hpp"
#include "npspec/functionals.hpp"
#include "npspec/grid.hpp"
#include "npspec/jet.hpp"
#include "npspec/linalg.hpp"
#include "npspec/quadrature.hpp"
#include "npspec/report.hpp"
#include "npspec/spectrum.hpp"
#include "npspec/surface.hpp"
