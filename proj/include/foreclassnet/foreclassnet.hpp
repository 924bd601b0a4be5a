#ifndef FORECLASSNET_FORECLASSNET_HPP
#define FORECLASSNET_FORECLASSNET_HPP

// Umbrella header: the whole library.

#include "foreclassnet/adam.hpp"
#include "foreclassnet/attack.hpp"
#include "foreclassnet/augment.hpp"
#include "foreclassnet/checkpoint.hpp"
#include "foreclassnet/config.hpp"
#include "foreclassnet/dataset.hpp"
#include "foreclassnet/dropout.hpp"
#include "foreclassnet/errors.hpp"
#include "foreclassnet/filters.hpp"
#include "foreclassnet/ingest.hpp"
#include "foreclassnet/layers.hpp"
#include "foreclassnet/metrics.hpp"
#include "foreclassnet/network.hpp"
#include "foreclassnet/ops.hpp"
#include "foreclassnet/rng.hpp"
#include "foreclassnet/simulate.hpp"
#include "foreclassnet/tensor.hpp"
#include "foreclassnet/train.hpp"
#include "foreclassnet/welford.hpp"

#endif  // FORECLASSNET_FORECLASSNET_HPP
