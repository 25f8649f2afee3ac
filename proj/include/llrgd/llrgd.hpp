#pragma once

#include "llrgd/classification.hpp"
#include "llrgd/corpus.hpp"
#include "llrgd/critical_points.hpp"
#include "llrgd/error.hpp"
#include "llrgd/linalg.hpp"
#include "llrgd/mlp.hpp"
#include "llrgd/mlp_compare.hpp"
#include "llrgd/objective.hpp"
#include "llrgd/optimizer.hpp"
#include "llrgd/parallel.hpp"
#include "llrgd/region.hpp"
#include "llrgd/saddle_analysis.hpp"
#include "llrgd/serialize.hpp"
