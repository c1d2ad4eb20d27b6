#pragma once

#include "lieharm/analysis.hpp"
#include "lieharm/coeffs.hpp"
#include "lieharm/duals.hpp"
#include "lieharm/opalg.hpp"
#include "lieharm/oracle.hpp"
#include "lieharm/parser.hpp"
#include "lieharm/report.hpp"
#include "lieharm/solve.hpp"
#include "lieharm/symbols.hpp"
