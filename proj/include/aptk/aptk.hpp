#pragma once

#include "aptk/error.hpp"
#include "aptk/exact.hpp"
#include "aptk/freq.hpp"
#include "aptk/sums.hpp"
#include "aptk/besic.hpp"
#include "aptk/fejer.hpp"
#include "aptk/search.hpp"
#include "aptk/io.hpp"
