#pragma once

#include "extphase/phase/brackets.hpp"
#include "extphase/phase/dynamics.hpp"
#include "extphase/phase/extended_point.hpp"
#include "extphase/phase/symplectic.hpp"
