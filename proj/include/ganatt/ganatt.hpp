#pragma once

#include "ganatt/adam.hpp"
#include "ganatt/att.hpp"
#include "ganatt/benchmark.hpp"
#include "ganatt/cate.hpp"
#include "ganatt/common.hpp"
#include "ganatt/dataset.hpp"
#include "ganatt/gan.hpp"
#include "ganatt/matching.hpp"
#include "ganatt/matrix.hpp"
#include "ganatt/metrics.hpp"
#include "ganatt/network.hpp"
#include "ganatt/propensity.hpp"
#include "ganatt/rng.hpp"
