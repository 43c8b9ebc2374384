#pragma once

#include "heavyconc/errors.hpp"
#include "heavyconc/format.hpp"
#include "heavyconc/numerics.hpp"
#include "heavyconc/potential.hpp"
#include "heavyconc/measures.hpp"
#include "heavyconc/beta.hpp"
#include "heavyconc/capacity.hpp"
#include "heavyconc/weak_poincare.hpp"
#include "heavyconc/isoperimetry.hpp"
#include "heavyconc/concentration.hpp"
#include "heavyconc/montecarlo.hpp"
#include "heavyconc/cli.hpp"
