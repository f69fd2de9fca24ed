#pragma once

// Umbrella header for the camtrap pipeline library.

#include "camtrap/ablation.hpp"
#include "camtrap/adam.hpp"
#include "camtrap/csv.hpp"
#include "camtrap/ensemble.hpp"
#include "camtrap/errors.hpp"
#include "camtrap/features.hpp"
#include "camtrap/manifest.hpp"
#include "camtrap/metrics.hpp"
#include "camtrap/model.hpp"
#include "camtrap/predictions.hpp"
#include "camtrap/rng.hpp"
#include "camtrap/run_record.hpp"
#include "camtrap/sampler.hpp"
#include "camtrap/schedule.hpp"
#include "camtrap/synth.hpp"
#include "camtrap/trainer.hpp"
