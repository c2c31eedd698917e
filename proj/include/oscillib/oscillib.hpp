#pragma once

#include "oscillib/generators.hpp"
#include "oscillib/grid.hpp"
#include "oscillib/grid_io.hpp"
#include "oscillib/maximal.hpp"
#include "oscillib/poincare.hpp"
#include "oscillib/random.hpp"
#include "oscillib/report.hpp"
#include "oscillib/summed_area.hpp"
#include "oscillib/verify.hpp"
#include "oscillib/whitney.hpp"
