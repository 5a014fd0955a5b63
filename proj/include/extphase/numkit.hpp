#pragma once

#include "extphase/numkit/dual.hpp"
#include "extphase/numkit/field.hpp"
#include "extphase/numkit/ode.hpp"
#include "extphase/numkit/quadrature.hpp"
#include "extphase/numkit/random.hpp"
#include "extphase/numkit/trajectory.hpp"
