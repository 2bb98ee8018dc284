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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "rpr/common.hpp"
#include "rpr/eval/eval.hpp"
#include "rpr/train/train.hpp"

namespace rpr::train {
namespace {

// Seed streams per role, so changing one knob never shifts another draw.
constexpr uint64_t kInitStream = 0x1417;
constexpr uint64_t kDropoutStream = 0xd209;
constexpr uint64_t kShuffleStream = 0xe70c00;

}  // namespace

void TrainHistory::write_csv(std::ostream& out) const {
  out << "epoch,train_loss,val_mse,val_mae,seconds\n";
  char buf[160];
  for (const EpochStats& e : epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.3f\n", e.epoch,
                  e.train_loss, e.val_mse, e.val_mae, e.seconds);
    out << buf;
  }
}

TrainResult train(const corpus::CorpusView& view, const TrainConfig& config) {
  validate(config);
  if (view.embeddings.rank() != 2 && config.model == model::ModelKind::kRpr) {
    throw DataError("corpus carries no embedding table");
  }

  model::ModelDims dims;
  dims.n_users = view.n_users();
  dims.n_items = view.n_items();
  dims.latent_dim = config.latent_dim;
  dims.preferred_aspects = config.preferred_aspects;
  dims.rejected_aspects = config.rejected_aspects;
  dims.n_filters = config.n_filters;
  dims.filter_width = config.filter_width;
  dims.embed_dim =
      view.embeddings.rank() == 2 ? view.embeddings.dim(1) : 0;
  dims.attention_hidden = config.attention_hidden;
  dims.vocab_size = view.vocab.size();

  const Tensor* table =
      config.model == model::ModelKind::kRpr ? &view.embeddings : nullptr;
  model::ModelParams params = model::init_params(
      dims, config.model, config.variant, derive_seed(config.seed, kInitStream),
      table);
  params.corpus_fingerprint = view.fingerprint;

  std::vector<std::vector<int>> groups =
      update_groups(config.model, config.freeze_embeddings);
  std::vector<AdamState> states;
  states.reserve(groups.size());
  for (const auto& g : groups) states.push_back(make_adam_state(params, g));

  const std::vector<corpus::CorpusView::Triple> train_triples =
      view.partition(view.split.train);
  std::vector<corpus::CorpusView::Triple> val_triples =
      view.partition(view.split.validation);
  if (train_triples.empty()) throw DataError("empty training partition");
  // Tiny corpora can end up without a validation slice; score the training
  // partition instead so early stopping still has a signal.
  if (val_triples.empty()) val_triples = train_triples;

  Rng dropout_rng(derive_seed(config.seed, kDropoutStream));
  model::ObjectiveConfig objective;
  objective.beta1 = config.beta1;
  objective.beta2 = config.beta2;
  objective.dropout = config.dropout;
  objective.dropout_rng = &dropout_rng;
  objective.pad_token = view.vocab.pad;

  TrainResult result{params, TrainHistory{}};
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  const std::size_t n = train_triples.size();

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(
        derive_seed(config.seed, kShuffleStream + static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    try {
      for (std::size_t start = 0; start < n; start += config.batch_size) {
        const std::size_t stop =
            std::min(n, start + static_cast<std::size_t>(config.batch_size));
        std::vector<corpus::CorpusView::Triple> batch;
        batch.reserve(stop - start);
        for (std::size_t k = start; k < stop; ++k) {
          batch.push_back(train_triples[order[k]]);
        }
        model::BatchGradients bg =
            model::forward_backward(params, batch, view.documents, objective);
        clip_global_norm(bg.grads, config.clip_norm);
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
          if (config.epoch_schedule &&
              gi != static_cast<std::size_t>(epoch) % groups.size()) {
            continue;
          }
          adam_step(params, bg.grads, states[gi], config.learning_rate,
                    config.adam_beta1, config.adam_beta2, config.adam_epsilon);
        }
        loss_sum += bg.loss;
        ++batches;
      }
    } catch (const DivergenceError&) {
      result.history.diverged = true;
      break;  // keep the best snapshot seen so far
    }

    model::Predictor scorer(params, view);
    const eval::MetricsReport report = eval::score(scorer, val_triples);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const double train_loss = batches ? loss_sum / batches : 0.0;
    result.history.epochs.push_back(
        {epoch, train_loss, report.mse, report.mae, seconds});

    // Norm clipping keeps the update finite even when the objective has
    // already overflowed, so divergence must be caught on the metrics too.
    if (!std::isfinite(train_loss) || !std::isfinite(report.mse)) {
      result.history.diverged = true;
      break;  // keep the best snapshot seen so far
    }

    if (report.mse < best) {
      best = report.mse;
      result.params = params;
      result.history.best_epoch = epoch;
      result.history.best_val_mse = report.mse;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace rpr::train
