#pragma once

// Umbrella header.

#include "nbodylab/equilibria.hpp"
#include "nbodylab/errors.hpp"
#include "nbodylab/forcelaw.hpp"
#include "nbodylab/integrate.hpp"
#include "nbodylab/io.hpp"
#include "nbodylab/probe.hpp"
#include "nbodylab/rng.hpp"
#include "nbodylab/saari.hpp"
#include "nbodylab/scenario.hpp"
#include "nbodylab/system.hpp"
