// Umbrella header.
#ifndef LIGHTHARVEST_HPP
#define LIGHTHARVEST_HPP

#include "lightharvest/kernels.hpp"
#include "lightharvest/channel.hpp"
#include "lightharvest/convex.hpp"
#include "lightharvest/wpcn.hpp"
#include "lightharvest/slipt.hpp"
#include "lightharvest/oracles.hpp"
#include "lightharvest/config.hpp"
#include "lightharvest/csv.hpp"
#include "lightharvest/experiments.hpp"
#include "lightharvest/validation.hpp"
#include "lightharvest/cli.hpp"

#endif  // LIGHTHARVEST_HPP
