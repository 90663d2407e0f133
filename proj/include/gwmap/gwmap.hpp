#ifndef GWMAP_GWMAP_HPP
#define GWMAP_GWMAP_HPP

/**
 * @file gwmap.hpp
 *
 * @brief Umbrella header for the library. The CLI lives separately in `cli.hpp`.
 */

#include "errors.hpp"
#include "interpret.hpp"
#include "io.hpp"
#include "model.hpp"
#include "neighbors.hpp"
#include "points.hpp"
#include "random.hpp"
#include "training.hpp"

#endif
