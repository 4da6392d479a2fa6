#pragma once

#include "fairpca/dataset.hpp"
#include "fairpca/descent.hpp"
#include "fairpca/evaluation.hpp"
#include "fairpca/linalg.hpp"
#include "fairpca/objectives.hpp"
#include "fairpca/solver.hpp"
#include "fairpca/types.hpp"
