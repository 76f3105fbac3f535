#pragma once

#include "stormpipe/analysis.hpp"
#include "stormpipe/clustering.hpp"
#include "stormpipe/corpus.hpp"
#include "stormpipe/date.hpp"
#include "stormpipe/entities.hpp"
#include "stormpipe/pipeline.hpp"
#include "stormpipe/similarity.hpp"
#include "stormpipe/storms.hpp"
#include "stormpipe/synthetic.hpp"
