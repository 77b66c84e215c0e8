#pragma once

#include "adclust.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "game.hpp"
#include "grid.hpp"
#include "io/config.hpp"
#include "io/csv.hpp"
#include "io/report.hpp"
#include "io/svg.hpp"
#include "kernel.hpp"
#include "merge.hpp"
#include "stats.hpp"
#include "sweep.hpp"
#include "synthetic.hpp"
#include "walls.hpp"
