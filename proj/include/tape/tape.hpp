// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tape/attention.hpp"
#include "tape/config.hpp"
#include "tape/errors.hpp"
#include "tape/grid.hpp"
#include "tape/metrics.hpp"
#include "tape/pipeline.hpp"
#include "tape/policy.hpp"
#include "tape/reference.hpp"
#include "tape/report.hpp"
#include "tape/rng.hpp"
#include "tape/sweep.hpp"
#include "tape/verify.hpp"
