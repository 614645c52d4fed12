#pragma once

#include "brepseq/brep.hpp"
#include "brepseq/brep_ops.hpp"
#include "brepseq/corpus.hpp"
#include "brepseq/curve.hpp"
#include "brepseq/geometry.hpp"
#include "brepseq/grammar.hpp"
#include "brepseq/hungarian.hpp"
#include "brepseq/io.hpp"
#include "brepseq/metrics.hpp"
#include "brepseq/ngram.hpp"
#include "brepseq/pipeline.hpp"
#include "brepseq/reconstruct.hpp"
#include "brepseq/rq.hpp"
#include "brepseq/surface.hpp"
#include "brepseq/tokenizer.hpp"
#include "brepseq/util.hpp"
#include "brepseq/validate.hpp"
#include "brepseq/vhp.hpp"
#include "brepseq/vocab.hpp"
