#pragma once

#include "hsbm/combinatorics.hpp"
#include "hsbm/error.hpp"
#include "hsbm/harness.hpp"
#include "hsbm/io.hpp"
#include "hsbm/linalg.hpp"
#include "hsbm/model.hpp"
#include "hsbm/oracle.hpp"
#include "hsbm/random.hpp"
#include "hsbm/sdp.hpp"
#include "hsbm/similarity.hpp"
#include "hsbm/spectral.hpp"
#include "hsbm/stats.hpp"
#include "hsbm/thresholds.hpp"
#include "hsbm/version.hpp"
