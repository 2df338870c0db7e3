#pragma once

#include "ahlab/error.hpp"
#include "ahlab/jets.hpp"
#include "ahlab/expr.hpp"
#include "ahlab/linalg.hpp"
#include "ahlab/tensor.hpp"
#include "ahlab/geometry.hpp"
#include "ahlab/analysis.hpp"
#include "ahlab/sampling.hpp"
#include "ahlab/chart_file.hpp"
#include "ahlab/zoo.hpp"
#include "ahlab/cli.hpp"
