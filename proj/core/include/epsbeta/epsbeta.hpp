#pragma once

#include "epsbeta/analysis.hpp"
#include "epsbeta/column_ops.hpp"
#include "epsbeta/density.hpp"
#include "epsbeta/error.hpp"
#include "epsbeta/expression.hpp"
#include "epsbeta/fixtures.hpp"
#include "epsbeta/grid_cluster.hpp"
#include "epsbeta/grid_io.hpp"
#include "epsbeta/infiltration.hpp"
#include "epsbeta/measures.hpp"
#include "epsbeta/report_json.hpp"
#include "epsbeta/surgery.hpp"
