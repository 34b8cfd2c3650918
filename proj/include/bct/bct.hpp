#pragma once

#include "bct/asymptotics.hpp"
#include "bct/errors.hpp"
#include "bct/estimator.hpp"
#include "bct/expr.hpp"
#include "bct/families.hpp"
#include "bct/margins.hpp"
#include "bct/numeric.hpp"
#include "bct/oracle.hpp"
#include "bct/rng.hpp"
#include "bct/sampler.hpp"
#include "bct/statfun.hpp"
#include "bct/stats.hpp"
#include "bct/version.hpp"
