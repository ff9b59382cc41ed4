#pragma once

#include "protomac/adam.hpp"
#include "protomac/baselines.hpp"
#include "protomac/checkpoint.hpp"
#include "protomac/config.hpp"
#include "protomac/config_io.hpp"
#include "protomac/env.hpp"
#include "protomac/episode.hpp"
#include "protomac/harness.hpp"
#include "protomac/history.hpp"
#include "protomac/maddpg.hpp"
#include "protomac/mlp.hpp"
#include "protomac/policy.hpp"
#include "protomac/replay.hpp"
#include "protomac/results_io.hpp"
#include "protomac/rng.hpp"
#include "protomac/sampling.hpp"
#include "protomac/sha1.hpp"
#include "protomac/version.hpp"
