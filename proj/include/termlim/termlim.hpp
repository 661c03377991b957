#pragma once

// Umbrella header: the full public interface.

#include "distance.hpp"
#include "term.hpp"
#include "parse.hpp"
#include "cauchy.hpp"
#include "horn.hpp"
#include "limits.hpp"
#include "ring.hpp"
