#pragma once

#include "extphase/transform/embed.hpp"
#include "extphase/transform/generating.hpp"
#include "extphase/transform/legendre.hpp"
#include "extphase/transform/map.hpp"
#include "extphase/transform/newton.hpp"
#include "extphase/transform/report.hpp"
