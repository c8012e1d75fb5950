#pragma once

// Umbrella header.

#include "cadlog/core.hpp"
#include "cadlog/experiments.hpp"
#include "cadlog/feature_csv.hpp"
#include "cadlog/features.hpp"
#include "cadlog/ingest.hpp"
#include "cadlog/learn.hpp"
#include "cadlog/report.hpp"
#include "cadlog/rng.hpp"
#include "cadlog/synth.hpp"
