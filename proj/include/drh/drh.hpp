#pragma once

#include "drh/core.hpp"
#include "drh/primes.hpp"
#include "drh/dirichlet.hpp"
#include "drh/series.hpp"
#include "drh/ntt.hpp"
#include "drh/tau.hpp"
#include "drh/elliptic.hpp"
#include "drh/lfunction.hpp"
#include "drh/euler_product.hpp"
#include "drh/race.hpp"
#include "drh/function_field.hpp"
#include "drh/cache.hpp"
#include "drh/report.hpp"
#include "drh/cli.hpp"
