#pragma once

#include "copkit/core/corpus.hpp"
#include "copkit/core/error.hpp"
#include "copkit/core/io.hpp"
#include "copkit/core/parse.hpp"
#include "copkit/core/permutation.hpp"
#include "copkit/core/rng.hpp"
#include "copkit/core/step_label.hpp"
#include "copkit/core/table.hpp"
#include "copkit/core/text.hpp"
#include "copkit/core/types.hpp"
#include "copkit/core/validate.hpp"
#include "copkit/embedding/store.hpp"
#include "copkit/gateway/cache.hpp"
#include "copkit/gateway/http_provider.hpp"
#include "copkit/gateway/provider.hpp"
#include "copkit/gateway/request.hpp"
#include "copkit/gateway/scripted.hpp"
#include "copkit/gateway/usage.hpp"
#include "copkit/forge/config.hpp"
#include "copkit/forge/fusion.hpp"
#include "copkit/forge/instance.hpp"
#include "copkit/forge/mining.hpp"
#include "copkit/forge/overlap.hpp"
#include "copkit/forge/split.hpp"
#include "copkit/forge/stats.hpp"
#include "copkit/forge/synth.hpp"
#include "copkit/cop/batch.hpp"
#include "copkit/cop/clip.hpp"
#include "copkit/cop/oracle.hpp"
#include "copkit/cop/pipeline.hpp"
#include "copkit/cop/result.hpp"
#include "copkit/cop/templates.hpp"
#include "copkit/subtasks/subtasks.hpp"
#include "copkit/metrics/accuracy.hpp"
#include "copkit/metrics/agreement.hpp"
#include "copkit/metrics/breakdown.hpp"
#include "copkit/metrics/evaluate.hpp"
#include "copkit/metrics/llm_score.hpp"
#include "copkit/metrics/similarity.hpp"
