#pragma once
// Convenience umbrella header.

#include "varnet/bootstrap_ci.hpp"
#include "varnet/csv.hpp"
#include "varnet/dataset.hpp"
#include "varnet/eval.hpp"
#include "varnet/matrix.hpp"
#include "varnet/parallel.hpp"
#include "varnet/relu_net.hpp"
#include "varnet/rng.hpp"
#include "varnet/scenarios.hpp"
#include "varnet/variance_estimators.hpp"
