#pragma once

#include "adiavac/errors.hpp"
#include "adiavac/numeric.hpp"
#include "adiavac/jet.hpp"
#include "adiavac/background.hpp"
#include "adiavac/adiabatic.hpp"
#include "adiavac/dop853.hpp"
#include "adiavac/modes.hpp"
#include "adiavac/states.hpp"
#include "adiavac/parallel.hpp"
#include "adiavac/bogoliubov.hpp"
#include "adiavac/detector.hpp"
#include "adiavac/version.hpp"
