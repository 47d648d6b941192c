#pragma once

#include "xfrag/clustering.hpp"
#include "xfrag/engine.hpp"
#include "xfrag/errors.hpp"
#include "xfrag/fragmenter.hpp"
#include "xfrag/generator.hpp"
#include "xfrag/model.hpp"
#include "xfrag/report.hpp"
#include "xfrag/sat.hpp"
#include "xfrag/strategies.hpp"
#include "xfrag/warehouse_io.hpp"
#include "xfrag/workload.hpp"
#include "xfrag/xml.hpp"
