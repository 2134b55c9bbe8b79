#pragma once

#include "scone/core.hpp"
#include "scone/circuits.hpp"
#include "scone/certify.hpp"
#include "scone/affine.hpp"
#include "scone/liftrep.hpp"
#include "scone/witness.hpp"
#include "scone/conic.hpp"
