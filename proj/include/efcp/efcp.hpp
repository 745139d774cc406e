#pragma once

#include "error.hpp"
#include "grid.hpp"
#include "pattern.hpp"
#include "distance.hpp"
#include "srsf.hpp"
#include "registration.hpp"
#include "metric.hpp"
#include "smoothing.hpp"
#include "conformal.hpp"
#include "simeval.hpp"
#include "io.hpp"
