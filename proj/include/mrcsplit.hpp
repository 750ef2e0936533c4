#pragma once

#include "mrcsplit/annotate.hpp"
#include "mrcsplit/corpus.hpp"
#include "mrcsplit/error.hpp"
#include "mrcsplit/heuristics.hpp"
#include "mrcsplit/io.hpp"
#include "mrcsplit/metrics.hpp"
#include "mrcsplit/parallel.hpp"
#include "mrcsplit/partition.hpp"
#include "mrcsplit/porter.hpp"
#include "mrcsplit/predictions.hpp"
#include "mrcsplit/random.hpp"
#include "mrcsplit/report.hpp"
#include "mrcsplit/stats.hpp"
#include "mrcsplit/stopwords.hpp"
#include "mrcsplit/textproc.hpp"
#include "mrcsplit/unicode.hpp"
#include "mrcsplit/version.hpp"
