#pragma once

#include "torusarm/collision.hpp"
#include "torusarm/control.hpp"
#include "torusarm/cspace.hpp"
#include "torusarm/error.hpp"
#include "torusarm/geometry.hpp"
#include "torusarm/kinematics.hpp"
#include "torusarm/navigator.hpp"
#include "torusarm/random.hpp"
#include "torusarm/raster_io.hpp"
#include "torusarm/scenario.hpp"
#include "torusarm/session.hpp"
