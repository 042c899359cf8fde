#pragma once

#include "asanakit/bench.hpp"
#include "asanakit/classifiers/model.hpp"
#include "asanakit/classifiers/search.hpp"
#include "asanakit/correction.hpp"
#include "asanakit/dataset.hpp"
#include "asanakit/error.hpp"
#include "asanakit/geometry.hpp"
#include "asanakit/metrics.hpp"
#include "asanakit/session.hpp"
#include "asanakit/skeleton.hpp"
#include "asanakit/synth.hpp"
