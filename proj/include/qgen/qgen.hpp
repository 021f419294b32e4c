#pragma once

#include "qgen/baselines.hpp"
#include "qgen/config.hpp"
#include "qgen/corpus.hpp"
#include "qgen/decoder.hpp"
#include "qgen/encoder.hpp"
#include "qgen/error.hpp"
#include "qgen/eval.hpp"
#include "qgen/gradcheck.hpp"
#include "qgen/graph.hpp"
#include "qgen/model_gradcheck.hpp"
#include "qgen/param_store.hpp"
#include "qgen/pipeline.hpp"
#include "qgen/seq2seq.hpp"
#include "qgen/silver.hpp"
#include "qgen/tensor.hpp"
#include "qgen/text.hpp"
#include "qgen/typedist.hpp"
