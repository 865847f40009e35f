#pragma once

#include "smpset/apprenticeship.hpp"
#include "smpset/composition.hpp"
#include "smpset/discovery.hpp"
#include "smpset/errors.hpp"
#include "smpset/experiment.hpp"
#include "smpset/gridworld.hpp"
#include "smpset/mdp.hpp"
#include "smpset/sampling.hpp"
#include "smpset/serialization.hpp"
#include "smpset/successor_features.hpp"
#include "smpset/worst_case.hpp"
