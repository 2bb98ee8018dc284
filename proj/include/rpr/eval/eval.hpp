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

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rpr/corpus/corpus.hpp"
#include "rpr/model/model.hpp"
#include "rpr/tensor.hpp"

namespace rpr::eval {

struct MetricsReport {
  double mse = 0.0;
  double mae = 0.0;
  std::size_t count = 0;
};

// Mean squared and absolute error over the given triples, accumulated left to
// right. `clip` bounds each prediction to the 1..5 rating scale first.
// Throws DataError on an empty list.
MetricsReport score(model::Predictor& predictor,
                    const std::vector<corpus::CorpusView::Triple>& triples,
                    bool clip = false);

// Same metrics over raw records whose ids may be absent from the corpus.
// Unseen users or items throw LookupError naming the id unless
// fallback_to_mean is set, in which case the training-mean rating stands in.
MetricsReport score_records(model::Predictor& predictor,
                            const corpus::CorpusView& view,
                            const std::vector<corpus::InteractionRecord>& records,
                            bool clip = false, bool fallback_to_mean = false);

struct WordAssignment {
  std::string word;
  int token = -1;
  int aspect = -1;       // argmax of the averaged weight vector, ties go low
  int occurrences = 0;   // occurrences in the user's polarity document
  Tensor weights;        // averaged per-occurrence aspect weight vector
};

// Runs the convolutional extractor over the user's document of the given
// polarity and averages each distinct word's aspect weight vector across its
// occurrences. Words appear in first-occurrence order; an empty document
// yields an empty list.
std::vector<WordAssignment> classify_words(const model::ModelParams& params,
                                           const corpus::CorpusView& view,
                                           int user, model::Polarity side);

struct AspectWords {
  int aspect = 0;
  // Ranked word, score pairs; score = averaged aspect weight times the
  // word's occurrence count, ties broken lexicographically.
  std::vector<std::pair<std::string, double>> words;
};

std::vector<AspectWords> top_aspect_words(const model::ModelParams& params,
                                          const corpus::CorpusView& view,
                                          int user, model::Polarity side,
                                          int top_k = 10);

struct ExplanationReport {
  std::string user_id;
  std::string item_id;
  model::AspectProfile profile;
  std::vector<AspectWords> preferred_words;
  std::vector<AspectWords> rejected_words;
};

// Everything behind one prediction: the aspect scores and importance on both
// sides, the two inner-product terms, and the top words per aspect.
ExplanationReport explain_rating(model::Predictor& predictor,
                                 const corpus::CorpusView& view, int user,
                                 int item, int top_k = 10);

// Fixed-layout text rendering of a report; identical inputs give identical
// strings.
std::string format_explanation(const ExplanationReport& report);

}  // namespace rpr::eval
