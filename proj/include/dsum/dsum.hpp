#pragma once

// Library headers. report.hpp and runner.hpp additionally need nlohmann/json.

#include "dsum/seqcore.hpp"
#include "dsum/matrix4d.hpp"
#include "dsum/verdict.hpp"
#include "dsum/convergence.hpp"
#include "dsum/corpus.hpp"
#include "dsum/classcheck.hpp"
#include "dsum/expr.hpp"
#include "dsum/config.hpp"
#include "dsum/battery.hpp"
