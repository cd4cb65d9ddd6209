#pragma once

#include <gphedge/acq_maximizer.hpp>
#include <gphedge/acquisitions.hpp>
#include <gphedge/bo_loop.hpp>
#include <gphedge/errors.hpp>
#include <gphedge/gp_core.hpp>
#include <gphedge/harness.hpp>
#include <gphedge/metrics.hpp>
#include <gphedge/normal.hpp>
#include <gphedge/objectives.hpp>
#include <gphedge/portfolio.hpp>
#include <gphedge/random.hpp>
#include <gphedge/synthetic_io.hpp>
#include <gphedge/trial_record.hpp>
