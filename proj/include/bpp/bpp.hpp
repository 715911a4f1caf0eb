#pragma once

// Umbrella header: change-point chain prior, season-trend design, robust EM,
// model selection, Gibbs sampling, synthetic benchmark, and CSV plumbing.

#include "bpp/chain.hpp"
#include "bpp/design.hpp"
#include "bpp/detect.hpp"
#include "bpp/em.hpp"
#include "bpp/errors.hpp"
#include "bpp/forward_backward.hpp"
#include "bpp/gibbs.hpp"
#include "bpp/io.hpp"
#include "bpp/likelihood.hpp"
#include "bpp/log.hpp"
#include "bpp/rng.hpp"
#include "bpp/simstudy.hpp"
#include "bpp/time_grid.hpp"
#include "bpp/util.hpp"
