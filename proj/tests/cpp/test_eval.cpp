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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "reference_model.hpp"
#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"
#include "rpr/eval/eval.hpp"
#include "rpr/model/model.hpp"
#include "rpr/train/train.hpp"

using namespace rpr::eval;
using rpr::Tensor;
using rpr::corpus::CorpusView;
using rpr::model::ModelKind;
using rpr::model::ModelParams;
using rpr::model::Polarity;
using rpr::model::Predictor;
using rpr::model::Variant;

namespace {

// Constant-prediction baseline: every rating comes out as `value`.
struct ConstantSetup {
  ModelParams params;
  CorpusView view;
};

ConstantSetup constant_model(double value, int n_users = 2, int n_items = 2) {
  rpr::model::ModelDims dims;
  dims.n_users = n_users;
  dims.n_items = n_items;
  dims.latent_dim = 1;
  ConstantSetup s{rpr::model::init_params(dims, ModelKind::kMf, Variant::kBase, 1),
                  CorpusView{}};
  for (int u = 0; u < n_users; ++u) s.params.user_factors.at(u, 0) = value;
  for (int i = 0; i < n_items; ++i) s.params.item_factors.at(i, 0) = 1.0;
  s.view.documents.resize(static_cast<size_t>(n_users));
  for (int u = 0; u < n_users; ++u) {
    s.view.user_ids.push_back("user" + std::to_string(u));
    s.view.user_index.emplace(s.view.user_ids.back(), u);
  }
  for (int i = 0; i < n_items; ++i) {
    s.view.item_ids.push_back("item" + std::to_string(i));
    s.view.item_index.emplace(s.view.item_ids.back(), i);
  }
  return s;
}

// Hand-built single-filter model whose per-word aspect weights are easy to
// trace: embeddings alpha = 1 and beta = 10, a width-3 filter with left
// context 0.5 and center 1, and identical zero biases.
struct WordSetup {
  ModelParams params;
  CorpusView view;
};

WordSetup word_model(double w0, double w1) {
  rpr::model::ModelDims dims;
  dims.n_users = 1;
  dims.n_items = 1;
  dims.latent_dim = 1;
  dims.preferred_aspects = 2;
  dims.rejected_aspects = 2;
  dims.n_filters = 1;
  dims.filter_width = 3;
  dims.embed_dim = 1;
  dims.attention_hidden = 1;
  dims.vocab_size = 4;
  WordSetup s{rpr::model::init_params(dims, ModelKind::kRpr, Variant::kBase, 2), CorpusView{}};
  s.params.word_embeddings = Tensor::from({4, 1}, {1.0, 10.0, 0.0, 0.0});
  s.params.conv_filters = Tensor({3, 1, 1});
  s.params.conv_filters.at(0, 0, 0) = 0.5;  // left neighbor
  s.params.conv_filters.at(1, 0, 0) = 1.0;  // the word itself
  s.params.conv_bias = Tensor({1});
  s.params.preferred_head_weight = Tensor::from({2, 1}, {w0, w1});
  s.params.preferred_head_bias = Tensor({2});

  s.view.user_ids = {"u"};
  s.view.user_index.emplace("u", 0);
  s.view.item_ids = {"i"};
  s.view.item_index.emplace("i", 0);
  s.view.vocab.tokens = {"alpha", "beta", "<oov>", "<pad>"};
  for (int k = 0; k < 4; ++k) s.view.vocab.index.emplace(s.view.vocab.tokens[static_cast<size_t>(k)], k);
  s.view.vocab.oov = 2;
  s.view.vocab.pad = 3;
  s.view.documents.resize(1);
  s.view.documents[0].positive = {0, 1, 0};  // alpha beta alpha
  s.view.documents[0].merged = s.view.documents[0].positive;
  return s;
}

}  // namespace

TEST_CASE("metrics on a constant predictor match hand arithmetic") {
  ConstantSetup s = constant_model(3.0);
  Predictor pred(s.params, s.view);
  std::vector<CorpusView::Triple> triples{{0, 0, 1.0}, {0, 1, 5.0}};
  MetricsReport report = score(pred, triples);
  CHECK(report.mse == doctest::Approx(4.0).epsilon(1e-12));  // (4 + 4) / 2
  CHECK(report.mae == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(report.count == 2);

  // Perfect predictions score zero.
  std::vector<CorpusView::Triple> perfect{{0, 0, 3.0}, {1, 1, 3.0}};
  MetricsReport zero = score(pred, perfect);
  CHECK(zero.mse == 0.0);
  CHECK(zero.mae == 0.0);

  CHECK_THROWS_AS(score(pred, {}), rpr::DataError);
}

TEST_CASE("clipping bounds predictions to the rating scale") {
  ConstantSetup s = constant_model(7.0);
  Predictor pred(s.params, s.view);
  std::vector<CorpusView::Triple> triples{{0, 0, 5.0}};
  CHECK(score(pred, triples).mse == doctest::Approx(4.0));   // raw error 2
  CHECK(score(pred, triples, true).mse == 0.0);              // clipped to 5

  ConstantSetup low = constant_model(-2.0);
  Predictor lp(low.params, low.view);
  std::vector<CorpusView::Triple> bottom{{0, 0, 1.0}};
  CHECK(score(lp, bottom, true).mse == 0.0);  // clipped up to 1
}

TEST_CASE("metrics match a plain scalar recomputation") {
  ConstantSetup s = constant_model(2.5, 3, 3);
  for (int u = 0; u < 3; ++u) s.params.user_factors.at(u, 0) = 1.0 + 0.5 * u;
  Predictor pred(s.params, s.view);
  rpr::Rng rng(17);
  std::vector<CorpusView::Triple> triples;
  for (int u = 0; u < 3; ++u)
    for (int i = 0; i < 3; ++i) triples.push_back({u, i, rng.uniform(1.0, 5.0)});
  MetricsReport report = score(pred, triples);
  double se = 0.0, ae = 0.0;
  for (const auto& t : triples) {
    const double err = t.rating - (1.0 + 0.5 * t.user);
    se += err * err;
    ae += std::abs(err);
  }
  CHECK(std::abs(report.mse - se / 9.0) < 1e-12);
  CHECK(std::abs(report.mae - ae / 9.0) < 1e-12);
  CHECK(report.mae * report.mae <= report.mse + 1e-12);
}

TEST_CASE("record scoring resolves ids and falls back to the mean") {
  ConstantSetup s = constant_model(3.0);
  s.view.triples = {{0, 0, 2.0}, {1, 1, 4.0}};
  s.view.split.train = {0, 1};  // training mean rating 3.0
  Predictor pred(s.params, s.view);

  std::vector<rpr::corpus::InteractionRecord> records;
  records.push_back({"user0", "item1", 5.0, "text"});
  MetricsReport hit = score_records(pred, s.view, records);
  CHECK(hit.mse == doctest::Approx(4.0));

  records.push_back({"ghost", "item1", 3.0, "text"});
  CHECK_THROWS_WITH_AS(score_records(pred, s.view, records),
                       doctest::Contains("ghost"), rpr::LookupError);

  MetricsReport fallback = score_records(pred, s.view, records, false, true);
  CHECK(fallback.count == 2);
  CHECK(fallback.mse == doctest::Approx(2.0));  // (4 + 0) / 2, ghost scored 3.0
}

TEST_CASE("word classification traces per-occurrence context windows") {
  // Document alpha beta alpha with conv output (1, 10.5, 6): the two alpha
  // occurrences sit in different windows, so their weights average.
  WordSetup s = word_model(1.0, 2.0);
  auto words = classify_words(s.params, s.view, 0, Polarity::kPreferred);
  REQUIRE(words.size() == 2);
  CHECK(words[0].word == "alpha");  // first-occurrence order
  CHECK(words[1].word == "beta");
  CHECK(words[0].occurrences == 2);
  CHECK(words[1].occurrences == 1);
  CHECK(words[0].weights.at(0) == doctest::Approx(3.5).epsilon(1e-12));   // (1 + 6) / 2
  CHECK(words[0].weights.at(1) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(words[1].weights.at(0) == doctest::Approx(10.5).epsilon(1e-12));
  CHECK(words[0].aspect == 1);
  CHECK(words[1].aspect == 1);
}

TEST_CASE("aspect ties resolve to the lowest index") {
  WordSetup s = word_model(1.0, 1.0);  // identical head rows: every tie
  auto words = classify_words(s.params, s.view, 0, Polarity::kPreferred);
  for (const auto& w : words) CHECK(w.aspect == 0);
}

TEST_CASE("positive rescaling of the head keeps assignments") {
  WordSetup a = word_model(1.0, 2.0);
  WordSetup b = word_model(3.0, 6.0);  // weights and (zero) biases scaled by 3
  auto wa = classify_words(a.params, a.view, 0, Polarity::kPreferred);
  auto wb = classify_words(b.params, b.view, 0, Polarity::kPreferred);
  REQUIRE(wa.size() == wb.size());
  for (size_t i = 0; i < wa.size(); ++i) CHECK(wa[i].aspect == wb[i].aspect);
}

TEST_CASE("word classification edge cases") {
  WordSetup s = word_model(1.0, 2.0);
  // The rejected-side document is empty.
  CHECK(classify_words(s.params, s.view, 0, Polarity::kRejected).empty());

  ModelParams mf = rpr::model::init_params(
      [] {
        rpr::model::ModelDims d;
        d.n_users = 1;
        d.n_items = 1;
        d.latent_dim = 1;
        return d;
      }(),
      ModelKind::kMf, Variant::kBase, 1);
  CHECK_THROWS_AS(classify_words(mf, s.view, 0, Polarity::kPreferred), rpr::ConfigError);
  CHECK_THROWS_AS(classify_words(s.params, s.view, 5, Polarity::kPreferred), rpr::LookupError);
}

TEST_CASE("top words rank by weight times occurrences") {
  WordSetup s = word_model(1.0, 2.0);
  auto tops = top_aspect_words(s.params, s.view, 0, Polarity::kPreferred, 10);
  REQUIRE(tops.size() == 2);  // one bucket per aspect, present even when empty
  CHECK(tops[0].aspect == 0);
  CHECK(tops[0].words.empty());
  REQUIRE(tops[1].words.size() == 2);
  // beta: weight 21, one occurrence; alpha: weight 7 averaged, two occurrences.
  CHECK(tops[1].words[0].first == "beta");
  CHECK(tops[1].words[0].second == doctest::Approx(21.0).epsilon(1e-12));
  CHECK(tops[1].words[1].first == "alpha");
  CHECK(tops[1].words[1].second == doctest::Approx(14.0).epsilon(1e-12));

  auto capped = top_aspect_words(s.params, s.view, 0, Polarity::kPreferred, 1);
  CHECK(capped[1].words.size() == 1);
  CHECK(capped[1].words[0].first == "beta");

  // Determinism: a second call renders the identical ranking.
  auto again = top_aspect_words(s.params, s.view, 0, Polarity::kPreferred, 10);
  CHECK(again[1].words == tops[1].words);
}

TEST_CASE("explanations decompose the prediction exactly") {
  WordSetup s = word_model(1.0, 2.0);
  Predictor pred(s.params, s.view);
  ExplanationReport report = explain_rating(pred, s.view, 0, 0);
  CHECK(report.user_id == "u");
  CHECK(report.item_id == "i");
  CHECK(report.profile.positive_term - report.profile.negative_term == report.profile.r_hat);
  CHECK(report.profile.r_hat == pred.predict(0, 0));
  CHECK(!report.preferred_words.empty());

  const std::string text = format_explanation(report);
  CHECK(text == format_explanation(report));  // stable rendering
  CHECK(text.find("predicted") != std::string::npos);
  CHECK(text.find("positive term") != std::string::npos);
  CHECK(text.find("preferred aspects") != std::string::npos);
  CHECK(text.find("beta") != std::string::npos);
}

TEST_CASE("dot-product explanations skip the aspect sections") {
  ConstantSetup s = constant_model(3.0);
  Predictor pred(s.params, s.view);
  ExplanationReport report = explain_rating(pred, s.view, 0, 0);
  CHECK(report.preferred_words.empty());
  CHECK(report.rejected_words.empty());
  const std::string text = format_explanation(report);
  CHECK(text.find("predicted") != std::string::npos);
  CHECK(text.find("aspects") == std::string::npos);
}

TEST_CASE("planted detector weights recover the word pools") {
  // The synthetic generator writes reviews from disjoint per-aspect word
  // pools. A hand-built detector (one conv filter per pool, heads routing
  // each filter to its aspect) must classify every pool word that survived
  // vocabulary pruning back to its pool, across the prepared corpus's real
  // tokenization, documents, and occurrence counting.
  rpr::corpus::SyntheticConfig synth;
  synth.n_users = 30;
  synth.n_items = 20;
  synth.seed = 91;
  synth.reviews_per_user = 8;
  synth.words_per_review = 8;
  synth.pool_size = 10;
  auto [records, truth] = rpr::corpus::generate_synthetic(synth);
  rpr::corpus::PrepareOptions opts;
  opts.seed = 91;
  opts.embedding_dim = 10;
  CorpusView view = rpr::corpus::prepare_corpus(records, opts);

  rpr::model::ModelDims dims;
  dims.n_users = view.n_users();
  dims.n_items = view.n_items();
  dims.latent_dim = 2;
  dims.preferred_aspects = 2;
  dims.rejected_aspects = 2;
  dims.n_filters = 4;
  dims.filter_width = 3;
  dims.embed_dim = 6;
  dims.attention_hidden = 2;
  dims.vocab_size = static_cast<int>(view.vocab.tokens.size());
  ModelParams params = rpr::model::init_params(dims, ModelKind::kRpr, Variant::kBase, 3);

  // Channel per pool: p0, p1, r0, r1 get channels 0..3; everything else
  // (filler, <oov>, <pad>) stays zero.
  params.word_embeddings = Tensor({dims.vocab_size, dims.embed_dim});
  for (int t = 0; t < dims.vocab_size; ++t) {
    const std::string& name = view.vocab.tokens[static_cast<size_t>(t)];
    int channel = -1;
    if (name.rfind("p0", 0) == 0) channel = 0;
    else if (name.rfind("p1", 0) == 0) channel = 1;
    else if (name.rfind("r0", 0) == 0) channel = 2;
    else if (name.rfind("r1", 0) == 0) channel = 3;
    if (channel >= 0) params.word_embeddings.at(t, channel) = 2.0;
  }
  // Filter f reads channel f of the word under the center tap; the filter
  // tensor is laid out (width, channels, filters).
  params.conv_filters = Tensor({3, 6, 4});
  for (int f = 0; f < 4; ++f) params.conv_filters.at(1, f, f) = 1.0;
  params.conv_bias = Tensor({4});
  params.preferred_head_weight = Tensor::from({2, 4}, {1, 0, 0, 0,  //
                                                       0, 1, 0, 0});
  params.preferred_head_bias = Tensor({2});
  params.rejected_head_weight = Tensor::from({2, 4}, {0, 0, 1, 0,  //
                                                      0, 0, 0, 1});
  params.rejected_head_bias = Tensor({2});

  for (Polarity side : {Polarity::kPreferred, Polarity::kRejected}) {
    const auto& pools = side == Polarity::kPreferred ? truth.preferred_pools
                                                     : truth.rejected_pools;
    std::map<std::string, int> pool_of;
    for (int a = 0; a < 2; ++a)
      for (const auto& w : pools[static_cast<size_t>(a)]) pool_of[w] = a;
    std::map<std::string, std::pair<double, double>> accum;
    for (int u = 0; u < view.n_users(); ++u) {
      for (const auto& w : classify_words(params, view, u, side)) {
        if (pool_of.find(w.word) == pool_of.end()) continue;
        auto& acc = accum[w.word];
        acc.first += w.weights.at(0) * w.occurrences;
        acc.second += w.weights.at(1) * w.occurrences;
      }
    }
    // Most of both 10-word pools should survive pruning and show up.
    REQUIRE(accum.size() >= 15);
    int correct = 0;
    for (const auto& [word, acc] : accum) {
      const int aspect = acc.second > acc.first ? 1 : 0;
      correct += aspect == pool_of[word];
    }
    CHECK(correct == static_cast<int>(accum.size()));
  }
}
