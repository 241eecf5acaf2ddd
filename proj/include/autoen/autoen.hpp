#pragma once

#include "autoen/error.hpp"
#include "autoen/matrix.hpp"
#include "autoen/runtime.hpp"
#include "autoen/dataset.hpp"
#include "autoen/preprocess.hpp"
#include "autoen/learners.hpp"
#include "autoen/metrics.hpp"
#include "autoen/pipeline.hpp"
#include "autoen/ensemble.hpp"
#include "autoen/persistence.hpp"
#include "autoen/stats.hpp"
#include "autoen/bench.hpp"
