#pragma once

#include "irmkit/dataset.hpp"
#include "irmkit/error.hpp"
#include "irmkit/harness.hpp"
#include "irmkit/io.hpp"
#include "irmkit/model.hpp"
#include "irmkit/preprocess.hpp"
#include "irmkit/ranking.hpp"
#include "irmkit/report.hpp"
#include "irmkit/rng.hpp"
#include "irmkit/scm.hpp"
