#pragma once

#include "crrlearn/checkpoint.hpp"
#include "crrlearn/config.hpp"
#include "crrlearn/conv.hpp"
#include "crrlearn/crr.hpp"
#include "crrlearn/dataset.hpp"
#include "crrlearn/estimators.hpp"
#include "crrlearn/io.hpp"
#include "crrlearn/likelihood.hpp"
#include "crrlearn/metrics.hpp"
#include "crrlearn/operators.hpp"
#include "crrlearn/prior.hpp"
#include "crrlearn/rng.hpp"
#include "crrlearn/sampler.hpp"
#include "crrlearn/sapg.hpp"
#include "crrlearn/tensor.hpp"
#include "crrlearn/tv.hpp"
