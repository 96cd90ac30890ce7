#pragma once

#include "btfuzz/dataset_io.hpp"
#include "btfuzz/error.hpp"
#include "btfuzz/evaluation.hpp"
#include "btfuzz/fuzzy.hpp"
#include "btfuzz/image.hpp"
#include "btfuzz/morphology.hpp"
#include "btfuzz/pipeline.hpp"
#include "btfuzz/preprocess.hpp"
#include "btfuzz/segmentation.hpp"
#include "btfuzz/thresholding.hpp"
