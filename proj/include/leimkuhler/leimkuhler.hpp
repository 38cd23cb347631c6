#pragma once

#include "leimkuhler/errors.hpp"
#include "leimkuhler/specfun.hpp"
#include "leimkuhler/curves.hpp"
#include "leimkuhler/mixing.hpp"
#include "leimkuhler/indices.hpp"
#include "leimkuhler/empirical.hpp"
#include "leimkuhler/fit.hpp"
#include "leimkuhler/order.hpp"
#include "leimkuhler/report.hpp"
