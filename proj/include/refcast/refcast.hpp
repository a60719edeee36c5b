#pragma once

#include "refcast/error.hpp"
#include "refcast/lmm/design.hpp"
#include "refcast/lmm/fit.hpp"
#include "refcast/lmm/predict.hpp"
#include "refcast/lmm/spec.hpp"
#include "refcast/lmm/stepwise.hpp"
#include "refcast/papermodels/forecast.hpp"
#include "refcast/papermodels/published.hpp"
#include "refcast/rcf/benchmarks.hpp"
#include "refcast/rcf/fixtures.hpp"
#include "refcast/rcf/stress.hpp"
#include "refcast/rcf/uplift.hpp"
#include "refcast/refdata/countries.hpp"
#include "refcast/refdata/csv.hpp"
#include "refcast/refdata/inflation.hpp"
#include "refcast/refdata/ingest.hpp"
#include "refcast/refdata/macro.hpp"
#include "refcast/refdata/types.hpp"
#include "refcast/stats/distribution.hpp"
#include "refcast/stats/kde.hpp"
#include "refcast/stats/rank_tests.hpp"
#include "refcast/stats/regression.hpp"
#include "refcast/stats/transform.hpp"
#include "refcast/synth/calibrate.hpp"
#include "refcast/synth/generate.hpp"
#include "refcast/synth/rng.hpp"
