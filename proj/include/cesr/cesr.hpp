#pragma once

#include "cesr/errors.hpp"
#include "cesr/hermitian.hpp"
#include "cesr/random.hpp"
#include "cesr/special.hpp"
#include "cesr/score.hpp"
#include "cesr/ces_model.hpp"
#include "cesr/estimators.hpp"
#include "cesr/metrics.hpp"
#include "cesr/bench.hpp"
