#pragma once

#include "segstitch/consensus/community.hpp"
#include "segstitch/consensus/graph.hpp"
#include "segstitch/consensus/segment.hpp"
#include "segstitch/consensus/tiling.hpp"
