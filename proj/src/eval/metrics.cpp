// Copyright 2026 The RPR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>

#include "rpr/common.hpp"
#include "rpr/eval/eval.hpp"

namespace rpr::eval {
namespace {

double clipped(double prediction, bool clip) {
  if (!clip) return prediction;
  return std::min(5.0, std::max(1.0, prediction));
}

}  // namespace

MetricsReport score(model::Predictor& predictor,
                    const std::vector<corpus::CorpusView::Triple>& triples,
                    bool clip) {
  if (triples.empty()) throw DataError("no examples to score");
  double se = 0.0;
  double ae = 0.0;
  for (const corpus::CorpusView::Triple& t : triples) {
    const double pred = clipped(predictor.predict(t.user, t.item), clip);
    const double err = t.rating - pred;
    se += err * err;
    ae += std::fabs(err);
  }
  const double n = static_cast<double>(triples.size());
  return {se / n, ae / n, triples.size()};
}

MetricsReport score_records(
    model::Predictor& predictor, const corpus::CorpusView& view,
    const std::vector<corpus::InteractionRecord>& records, bool clip,
    bool fallback_to_mean) {
  if (records.empty()) throw DataError("no examples to score");
  // The fallback only makes sense with a training mean to fall back on.
  const double mean = fallback_to_mean ? view.train_rating_mean() : 0.0;
  double se = 0.0;
  double ae = 0.0;
  for (const corpus::InteractionRecord& r : records) {
    const auto u = view.user_index.find(r.user_id);
    const auto i = view.item_index.find(r.item_id);
    double pred;
    if (u == view.user_index.end() || i == view.item_index.end()) {
      if (!fallback_to_mean) {
        const std::string& missing =
            u == view.user_index.end() ? r.user_id : r.item_id;
        throw LookupError("id '" + missing + "' is not in the corpus");
      }
      pred = mean;
    } else {
      pred = predictor.predict(u->second, i->second);
    }
    pred = clipped(pred, clip);
    const double err = r.rating - pred;
    se += err * err;
    ae += std::fabs(err);
  }
  const double n = static_cast<double>(records.size());
  return {se / n, ae / n, records.size()};
}

}  // namespace rpr::eval
