#pragma once

#include "optshrink/asymptotics.hpp"
#include "optshrink/csv.hpp"
#include "optshrink/dtransform.hpp"
#include "optshrink/errors.hpp"
#include "optshrink/harness.hpp"
#include "optshrink/linalg.hpp"
#include "optshrink/oracle.hpp"
#include "optshrink/random.hpp"
#include "optshrink/shrinkage.hpp"
