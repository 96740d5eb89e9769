#pragma once

#include "ikd/covariance.hpp"
#include "ikd/decomposition.hpp"
#include "ikd/error.hpp"
#include "ikd/eval.hpp"
#include "ikd/kernels.hpp"
#include "ikd/robustify.hpp"
#include "ikd/synthgen.hpp"
#include "ikd/types.hpp"
