#pragma once

#include "leafnet/config.hpp"
#include "leafnet/dataset.hpp"
#include "leafnet/error.hpp"
#include "leafnet/image.hpp"
#include "leafnet/metrics.hpp"
#include "leafnet/nn/checkpoint.hpp"
#include "leafnet/nn/gradient_check.hpp"
#include "leafnet/nn/layers.hpp"
#include "leafnet/nn/model.hpp"
#include "leafnet/nn/network.hpp"
#include "leafnet/nn/sgd.hpp"
#include "leafnet/nn/train.hpp"
#include "leafnet/preprocess.hpp"
#include "leafnet/random.hpp"
#include "leafnet/report.hpp"
#include "leafnet/synthetic.hpp"
#include "leafnet/tensor.hpp"
