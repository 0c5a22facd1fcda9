#pragma once

#include "decoh/errors.hpp"
#include "decoh/units.hpp"
#include "decoh/linalg.hpp"
#include "decoh/frame.hpp"
#include "decoh/wavepacket.hpp"
#include "decoh/surfaces.hpp"
#include "decoh/propagator.hpp"
#include "decoh/coherence.hpp"
#include "decoh/symmetry.hpp"
#include "decoh/oracle.hpp"
#include "decoh/config.hpp"
#include "decoh/commands.hpp"
#include "decoh/version.hpp"
