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
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "reference_model.hpp"
#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"
#include "rpr/eval/eval.hpp"
#include "rpr/train/train.hpp"

using namespace rpr::train;
using rpr::Tensor;
using rpr::model::kNumParams;
using rpr::model::ModelKind;
using rpr::model::ModelParams;
using rpr::model::Variant;

namespace {

// Small noiseless synthetic corpus shared by the training tests.
const rpr::corpus::CorpusView& small_corpus() {
  static const rpr::corpus::CorpusView view = [] {
    rpr::corpus::SyntheticConfig cfg;
    cfg.n_users = 12;
    cfg.n_items = 10;
    cfg.seed = 31;
    cfg.reviews_per_user = 5;
    auto [records, truth] = rpr::corpus::generate_synthetic(cfg);
    rpr::corpus::PrepareOptions opts;
    opts.seed = 31;
    opts.embedding_dim = 6;
    return rpr::corpus::prepare_corpus(records, opts);
  }();
  return view;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.latent_dim = 4;
  cfg.n_filters = 4;
  cfg.filter_width = 3;
  cfg.attention_hidden = 4;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 16;
  cfg.max_epochs = 3;
  cfg.patience = 50;
  cfg.dropout = 0.0;
  cfg.seed = 7;
  return cfg;
}

ModelParams tiny_params(uint64_t seed = 5) {
  rpr::model::ModelDims dims;
  dims.n_users = 3;
  dims.n_items = 3;
  dims.latent_dim = 2;
  dims.preferred_aspects = 2;
  dims.rejected_aspects = 2;
  dims.n_filters = 2;
  dims.filter_width = 1;
  dims.embed_dim = 2;
  dims.attention_hidden = 2;
  dims.vocab_size = 5;
  return rpr::model::init_params(dims, ModelKind::kRpr, Variant::kBase, seed);
}

}  // namespace

TEST_CASE("config entries round-trip through the parser") {
  TrainConfig cfg = tiny_config();
  cfg.model = ModelKind::kMf;
  cfg.variant = Variant::kNoOffset;
  cfg.epoch_schedule = true;
  cfg.learning_rate = 0.0012345678901234567;  // full precision must survive
  auto entries = config_entries(cfg);
  TrainConfig rebuilt;
  for (const auto& [key, value] : entries) apply_config_entry(rebuilt, key, value);
  CHECK(config_entries(rebuilt) == entries);
  CHECK(rebuilt.learning_rate == cfg.learning_rate);
  CHECK(rebuilt.model == ModelKind::kMf);
  CHECK(rebuilt.variant == Variant::kNoOffset);
  CHECK(rebuilt.epoch_schedule);
}

TEST_CASE("config text accepts comments and rejects bad lines") {
  TrainConfig cfg = parse_config_text(
      "# comment\n"
      "\n"
      "latent_dim = 16\n"
      "learning_rate=0.5\n"
      "variant = no_polarity\n"
      "freeze_embeddings = true\n",
      "test.cfg");
  CHECK(cfg.latent_dim == 16);
  CHECK(cfg.learning_rate == 0.5);
  CHECK(cfg.variant == Variant::kNoPolarity);
  CHECK(cfg.freeze_embeddings);
  CHECK(cfg.batch_size == TrainConfig{}.batch_size);  // untouched default

  CHECK_THROWS_WITH_AS(parse_config_text("latent_dim = 16\nnot a line\n", "f.cfg"),
                       doctest::Contains("f.cfg:2"), rpr::ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("mystery = 1\n", "f.cfg"),
                       doctest::Contains("unknown config key 'mystery'"), rpr::ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("latent_dim = soup\n", "f.cfg"),
                       doctest::Contains("expected an integer"), rpr::ConfigError);
  CHECK_THROWS_AS(parse_config_text("dropout = nope\n", "f.cfg"), rpr::ConfigError);
}

TEST_CASE("config files load with defaults and overrides") {
  testsupport::TempDir tmp;
  {
    std::ofstream out(tmp.file("run.cfg"));
    out << "max_epochs = 9\nseed = 123\n";
  }
  TrainConfig cfg = parse_config_file(tmp.file("run.cfg"));
  CHECK(cfg.max_epochs == 9);
  CHECK(cfg.seed == 123);
  CHECK_THROWS_AS(parse_config_file(tmp.file("absent.cfg")), rpr::ConfigError);
}

TEST_CASE("validate rejects out-of-range settings") {
  TrainConfig cfg = tiny_config();
  validate(cfg);
  auto expect_reject = [](TrainConfig broken) {
    CHECK_THROWS_AS(validate(broken), rpr::ConfigError);
  };
  TrainConfig c = cfg;
  c.latent_dim = 0;
  expect_reject(c);
  c = cfg;
  c.filter_width = 4;  // even
  expect_reject(c);
  c = cfg;
  c.learning_rate = -1;
  expect_reject(c);
  c = cfg;
  c.dropout = 1.0;
  expect_reject(c);
  c = cfg;
  c.adam_beta1 = 1.0;
  expect_reject(c);
  c = cfg;
  c.patience = 0;
  expect_reject(c);
  // The dot-product baseline ignores the text dimensions entirely.
  c = cfg;
  c.model = ModelKind::kMf;
  c.n_filters = -5;
  validate(c);
}

TEST_CASE("adam first step moves by the signed learning rate") {
  ModelParams p = tiny_params();
  const Tensor before = p.user_factors;
  AdamState state = make_adam_state(p, {rpr::model::kUserFactors});
  std::array<Tensor, kNumParams> grads;
  Tensor g(p.user_factors.shape());
  for (size_t i = 0; i < g.numel(); ++i) g.data()[i] = (i % 2 == 0) ? 0.5 : -2.0;
  grads[rpr::model::kUserFactors] = g;

  const double lr = 1e-3, eps = 1e-8;
  adam_step(p, grads, state, lr, 0.9, 0.999, eps);
  CHECK(state.step == 1);
  for (size_t i = 0; i < g.numel(); ++i) {
    // With bias correction the first update is lr * g / (|g| + eps').
    const double m_hat = g.data()[i];
    const double v_hat = g.data()[i] * g.data()[i];
    const double want = before.data()[i] - lr * m_hat / (std::sqrt(v_hat) + eps);
    CHECK(std::abs(p.user_factors.data()[i] - want) < 1e-12);
  }
}

TEST_CASE("adam ignores inactive gradients and other groups") {
  ModelParams p = tiny_params();
  const Tensor items_before = p.item_factors;
  const Tensor users_before = p.user_factors;
  AdamState state = make_adam_state(p, {rpr::model::kUserFactors});
  std::array<Tensor, kNumParams> grads;  // all empty: nothing moves
  adam_step(p, grads, state, 0.1, 0.9, 0.999, 1e-8);
  CHECK(state.step == 1);  // the step counter still advances
  CHECK(p.user_factors.bit_equal(users_before));

  // A gradient outside the group is ignored even when present.
  grads[rpr::model::kItemFactors] = Tensor::full(p.item_factors.shape(), 1.0);
  adam_step(p, grads, state, 0.1, 0.9, 0.999, 1e-8);
  CHECK(p.item_factors.bit_equal(items_before));

  Tensor bad = Tensor::full(p.user_factors.shape(), 1.0);
  bad.data()[0] = std::nan("");
  grads[rpr::model::kUserFactors] = bad;
  CHECK_THROWS_AS(adam_step(p, grads, state, 0.1, 0.9, 0.999, 1e-8),
                  rpr::DivergenceError);
}

TEST_CASE("global norm clip rescales exactly once past the threshold") {
  std::array<Tensor, kNumParams> grads;
  grads[0] = Tensor::from({2}, {3.0, 0.0});
  grads[1] = Tensor::from({1}, {4.0});  // overall norm 5
  const double reported = clip_global_norm(grads, 2.5);
  CHECK(reported == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(grads[0].at(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(grads[1].at(0) == doctest::Approx(2.0).epsilon(1e-12));

  // Below the threshold nothing changes.
  std::array<Tensor, kNumParams> small;
  small[0] = Tensor::from({2}, {0.3, 0.4});
  clip_global_norm(small, 2.5);
  CHECK(small[0].at(0) == 0.3);

  // Non-positive max disables clipping.
  std::array<Tensor, kNumParams> loose;
  loose[0] = Tensor::from({1}, {100.0});
  CHECK(clip_global_norm(loose, 0.0) == doctest::Approx(100.0));
  CHECK(loose[0].at(0) == 100.0);
}

TEST_CASE("update groups partition the active parameters") {
  auto groups = update_groups(ModelKind::kRpr, false);
  REQUIRE(groups.size() == 4);
  CHECK(groups[0] == std::vector<int>{rpr::model::kUserFactors});
  CHECK(groups[1] == std::vector<int>{rpr::model::kItemFactors});
  std::set<int> seen;
  size_t total = 0;
  for (const auto& g : groups) {
    for (int id : g) seen.insert(id);
    total += g.size();
  }
  CHECK(seen.size() == static_cast<size_t>(kNumParams));
  CHECK(total == static_cast<size_t>(kNumParams));  // no id in two groups

  auto frozen = update_groups(ModelKind::kRpr, true);
  std::set<int> seen_frozen;
  for (const auto& g : frozen)
    for (int id : g) seen_frozen.insert(id);
  CHECK(seen_frozen.count(rpr::model::kWordEmbeddings) == 0);
  CHECK(seen_frozen.size() == static_cast<size_t>(kNumParams) - 1);

  auto mf = update_groups(ModelKind::kMf, false);
  REQUIRE(mf.size() == 2);
  CHECK(mf[0] == std::vector<int>{rpr::model::kUserFactors});
  CHECK(mf[1] == std::vector<int>{rpr::model::kItemFactors});
}

TEST_CASE("training is deterministic under a fixed seed") {
  TrainConfig cfg = tiny_config();
  cfg.dropout = 0.2;  // the dropout stream must be reproducible too
  TrainResult a = train(small_corpus(), cfg);
  TrainResult b = train(small_corpus(), cfg);
  REQUIRE(a.history.epochs.size() == b.history.epochs.size());
  for (size_t e = 0; e < a.history.epochs.size(); ++e) {
    CHECK(a.history.epochs[e].train_loss == b.history.epochs[e].train_loss);
    CHECK(a.history.epochs[e].val_mse == b.history.epochs[e].val_mse);
    CHECK(a.history.epochs[e].val_mae == b.history.epochs[e].val_mae);
    // seconds is wall-clock time and may differ between the runs
  }
  for (int id : a.params.active_params())
    CHECK(a.params.tensor(id).bit_equal(b.params.tensor(id)));
  CHECK(a.history.best_epoch == b.history.best_epoch);

  TrainConfig other = cfg;
  other.seed = cfg.seed + 1;
  TrainResult c = train(small_corpus(), other);
  CHECK(!c.params.user_factors.bit_equal(a.params.user_factors));
}

TEST_CASE("zero learning rate leaves parameters at initialization") {
  TrainConfig cfg = tiny_config();
  cfg.learning_rate = 0.0;
  // The regularizer counts each touched factor row once per batch, so its
  // value depends on how the shuffle groups records. Zero it so the loss is
  // a pure data term and identical across epochs.
  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  cfg.max_epochs = 3;
  TrainResult result = train(small_corpus(), cfg);
  REQUIRE(result.history.epochs.size() == 3);
  for (const auto& e : result.history.epochs) {
    CHECK(e.val_mse == result.history.epochs[0].val_mse);
    // The shuffle reorders the per-batch sums, so the constant data term can
    // drift by a few ulps across epochs.
    CHECK(e.train_loss ==
          doctest::Approx(result.history.epochs[0].train_loss).epsilon(1e-12));
  }
  // Nothing moved, so a second run from the same seed matches bit for bit.
  TrainResult again = train(small_corpus(), cfg);
  for (int id : result.params.active_params())
    CHECK(result.params.tensor(id).bit_equal(again.params.tensor(id)));
}

TEST_CASE("best snapshot tracks the minimum validation mse") {
  TrainConfig cfg = tiny_config();
  cfg.max_epochs = 6;
  TrainResult result = train(small_corpus(), cfg);
  REQUIRE(!result.history.epochs.empty());
  double best = result.history.epochs[0].val_mse;
  int best_epoch = 0;
  for (const auto& e : result.history.epochs) {
    if (e.val_mse < best) {
      best = e.val_mse;
      best_epoch = e.epoch;
    }
  }
  CHECK(result.history.best_epoch == best_epoch);
  CHECK(result.history.best_val_mse == best);

  // The returned parameters really are the snapshot from that epoch: scoring
  // them on the validation partition reproduces the recorded mse.
  rpr::model::Predictor pred(result.params, small_corpus());
  auto val = small_corpus().partition(small_corpus().split.validation);
  rpr::eval::MetricsReport report = rpr::eval::score(pred, val);
  CHECK(report.mse == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("loss falls on a noiseless planted corpus") {
  TrainConfig cfg = tiny_config();
  cfg.max_epochs = 12;
  cfg.learning_rate = 0.02;
  TrainResult result = train(small_corpus(), cfg);
  REQUIRE(result.history.epochs.size() >= 4);
  const double first = result.history.epochs.front().train_loss;
  const double last = result.history.epochs.back().train_loss;
  CHECK(last < first);
  CHECK(!result.history.diverged);
}

TEST_CASE("early stopping respects patience") {
  TrainConfig cfg = tiny_config();
  cfg.max_epochs = 40;
  cfg.patience = 2;
  TrainResult result = train(small_corpus(), cfg);
  const int epochs_run = static_cast<int>(result.history.epochs.size());
  // Either the budget ran out or we stopped exactly patience epochs after
  // the best one.
  if (epochs_run < cfg.max_epochs)
    CHECK(epochs_run == result.history.best_epoch + 1 + cfg.patience);
}

TEST_CASE("an absurd learning rate raises the divergence flag") {
  TrainConfig cfg = tiny_config();
  cfg.learning_rate = 1e80;
  cfg.max_epochs = 6;
  TrainResult result = train(small_corpus(), cfg);
  CHECK(result.history.diverged);
  // The kept snapshot predates the blow-up and is still finite.
  for (int id : result.params.active_params())
    CHECK(result.params.tensor(id).all_finite());
}

TEST_CASE("epoch schedule touches one group per epoch") {
  // Seed chosen so the second scheduled epoch improves validation; train()
  // returns the best-validation snapshot, so the second epoch's update is
  // only observable when that epoch wins.
  TrainConfig frozen = tiny_config();
  frozen.seed = 11;
  frozen.learning_rate = 0.0;
  frozen.max_epochs = 1;
  TrainResult init = train(small_corpus(), frozen);  // parameters at init

  TrainConfig cfg = tiny_config();
  cfg.seed = 11;
  cfg.epoch_schedule = true;
  cfg.max_epochs = 1;  // epoch 0 updates group 0: the user factors
  TrainResult result = train(small_corpus(), cfg);
  CHECK(!result.params.user_factors.bit_equal(init.params.user_factors));
  for (int id : result.params.active_params()) {
    if (id == rpr::model::kUserFactors) continue;
    CHECK(result.params.tensor(id).bit_equal(init.params.tensor(id)));
  }

  // Two epochs reach the item factors as well.
  cfg.max_epochs = 2;
  cfg.patience = 50;
  TrainResult two = train(small_corpus(), cfg);
  REQUIRE(two.history.best_epoch == 1);
  CHECK(!two.params.item_factors.bit_equal(init.params.item_factors));
}

TEST_CASE("frozen embeddings stay at their corpus values") {
  TrainConfig cfg = tiny_config();
  cfg.freeze_embeddings = true;
  cfg.max_epochs = 2;
  TrainResult result = train(small_corpus(), cfg);
  CHECK(result.params.word_embeddings.bit_equal(small_corpus().embeddings));

  cfg.freeze_embeddings = false;
  TrainResult moved = train(small_corpus(), cfg);
  CHECK(!moved.params.word_embeddings.bit_equal(small_corpus().embeddings));
}

TEST_CASE("the dot-product baseline trains on the same corpus") {
  TrainConfig cfg = tiny_config();
  cfg.model = ModelKind::kMf;
  cfg.max_epochs = 4;
  TrainResult result = train(small_corpus(), cfg);
  CHECK(!result.history.diverged);
  CHECK(result.params.kind == ModelKind::kMf);
  CHECK(result.params.conv_filters.empty());
  CHECK(result.history.epochs.size() == 4);
}

TEST_CASE("history csv layout is stable") {
  TrainHistory history;
  history.epochs.push_back({0, 1.5, 2.25, 1.25, 0.5});
  history.epochs.push_back({1, 1.25, 2.0, 1.0, 0.25});
  std::ostringstream out;
  history.write_csv(out);
  std::istringstream lines(out.str());
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "epoch,train_loss,val_mse,val_mae,seconds");
  REQUIRE(std::getline(lines, line));
  CHECK(line.rfind("0,1.5,2.25,1.25,", 0) == 0);
  REQUIRE(std::getline(lines, line));
  CHECK(line.rfind("1,1.25,2,1,", 0) == 0);
  CHECK(!std::getline(lines, line));
}

TEST_CASE("grid cells enumerate the axes with derived seeds") {
  GridSpec spec;
  spec.aspect_counts = {1, 2};
  spec.latent_dims = {2, 4};
  spec.learning_rates = {0.01};
  spec.batch_sizes = {16, 32};
  TrainConfig base = tiny_config();
  base.max_epochs = 1;
  GridResult result = grid_search(small_corpus(), base, spec, 1);
  REQUIRE(result.cells.size() == 8);
  for (size_t k = 0; k < result.cells.size(); ++k) {
    const GridCell& cell = result.cells[k];
    CHECK(cell.index == k);
    CHECK(cell.config.seed == base.seed + k);
    CHECK(cell.config.preferred_aspects == cell.config.rejected_aspects);
  }
  // Axes are nested aspects, latent dim, lr, batch; the last axis moves first.
  CHECK(result.cells[0].config.batch_size == 16);
  CHECK(result.cells[1].config.batch_size == 32);
  CHECK(result.cells[2].config.latent_dim == 4);
  CHECK(result.cells[4].config.preferred_aspects == 2);
}

TEST_CASE("grid results are independent of the worker count") {
  GridSpec spec;
  spec.aspect_counts = {2};
  spec.latent_dims = {2, 4};
  spec.learning_rates = {0.01, 0.001};
  spec.batch_sizes = {16};
  TrainConfig base = tiny_config();
  base.max_epochs = 2;
  GridResult serial = grid_search(small_corpus(), base, spec, 1);
  GridResult threaded = grid_search(small_corpus(), base, spec, 3);
  REQUIRE(serial.cells.size() == threaded.cells.size());
  CHECK(serial.best == threaded.best);
  for (size_t k = 0; k < serial.cells.size(); ++k) {
    CHECK(serial.cells[k].val_mse == threaded.cells[k].val_mse);
    CHECK(serial.cells[k].test_mse == threaded.cells[k].test_mse);
    CHECK(serial.cells[k].best_epoch == threaded.cells[k].best_epoch);
  }
}

TEST_CASE("cell preference orders by mse then simplicity") {
  GridCell a, b;
  a.val_mse = 1.0;
  b.val_mse = 2.0;
  CHECK(cell_preferred(a, b));
  CHECK(!cell_preferred(b, a));

  b.val_mse = 1.0;
  a.config.latent_dim = 4;
  b.config.latent_dim = 8;
  CHECK(cell_preferred(a, b));  // smaller factors win ties

  b.config.latent_dim = 4;
  a.config.preferred_aspects = 2;
  b.config.preferred_aspects = 3;
  CHECK(cell_preferred(a, b));  // then fewer aspects

  b.config.preferred_aspects = 2;
  a.diverged = true;
  CHECK(!cell_preferred(a, b));  // diverged cells never win
  CHECK(cell_preferred(b, a));
}

TEST_CASE("grid csv marks exactly one winner") {
  GridSpec spec;
  spec.aspect_counts = {2};
  spec.latent_dims = {2};
  spec.learning_rates = {0.01, 0.001};
  spec.batch_sizes = {16};
  TrainConfig base = tiny_config();
  base.max_epochs = 1;
  GridResult result = grid_search(small_corpus(), base, spec, 1);
  std::ostringstream out;
  write_grid_csv(result, out);
  std::istringstream lines(out.str());
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line ==
        "index,latent_dim,aspects,learning_rate,batch_size,seed,best_epoch,"
        "diverged,val_mse,val_mae,test_mse,test_mae,selected");
  int rows = 0, winners = 0;
  while (std::getline(lines, line)) {
    ++rows;
    if (line.size() >= 2 && line.substr(line.size() - 2) == ",1") ++winners;
  }
  CHECK(rows == 2);
  CHECK(winners == 1);

  GridSpec empty;
  empty.latent_dims.clear();
  CHECK_THROWS_AS(grid_search(small_corpus(), base, empty, 1), rpr::ConfigError);
}
