#pragma once

#include "jurisrank/bm25.hpp"
#include "jurisrank/corpus.hpp"
#include "jurisrank/document.hpp"
#include "jurisrank/errors.hpp"
#include "jurisrank/eval_metrics.hpp"
#include "jurisrank/porter_stemmer.hpp"
#include "jurisrank/pv_dm.hpp"
#include "jurisrank/text_pipeline.hpp"
