#pragma once

#include "spikebench/coding.hpp"
#include "spikebench/dataset.hpp"
#include "spikebench/dnn.hpp"
#include "spikebench/error.hpp"
#include "spikebench/idx.hpp"
#include "spikebench/model.hpp"
#include "spikebench/neuron.hpp"
#include "spikebench/noise.hpp"
#include "spikebench/parallel.hpp"
#include "spikebench/rng.hpp"
#include "spikebench/robustness.hpp"
#include "spikebench/scale_plan.hpp"
#include "spikebench/simulate.hpp"
#include "spikebench/snnx.hpp"
#include "spikebench/spike_train.hpp"
#include "spikebench/sweep.hpp"
#include "spikebench/toy.hpp"
