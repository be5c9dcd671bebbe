#pragma once

#include "arrowgap/care.hpp"
#include "arrowgap/delay.hpp"
#include "arrowgap/gap.hpp"
#include "arrowgap/linalg.hpp"
#include "arrowgap/lqr.hpp"
#include "arrowgap/poly.hpp"
#include "arrowgap/robust.hpp"
#include "arrowgap/statespace.hpp"
#include "arrowgap/types.hpp"
