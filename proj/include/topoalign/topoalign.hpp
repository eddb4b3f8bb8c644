#pragma once

#include "topoalign/analysis.hpp"
#include "topoalign/error.hpp"
#include "topoalign/geometry.hpp"
#include "topoalign/losses.hpp"
#include "topoalign/persistence.hpp"
#include "topoalign/scheduler.hpp"
#include "topoalign/topic_library.hpp"
#include "topoalign/topics.hpp"
#include "topoalign/types.hpp"
#include "topoalign/union_find.hpp"
