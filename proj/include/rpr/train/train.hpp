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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rpr/corpus/corpus.hpp"
#include "rpr/model/graph.hpp"
#include "rpr/model/model.hpp"
#include "rpr/tensor.hpp"

namespace rpr::train {

// Everything a run needs beyond the corpus itself. Defaults are the shipped
// baseline; a config file or CLI flag can override any field.
struct TrainConfig {
  int latent_dim = 32;
  int preferred_aspects = 2;
  int rejected_aspects = 2;
  int n_filters = 50;
  int filter_width = 3;
  int attention_hidden = 32;

  double learning_rate = 1e-3;
  int batch_size = 100;
  int max_epochs = 50;
  int patience = 5;
  double dropout = 0.2;
  double clip_norm = 5.0;  // global gradient norm cap; <= 0 disables clipping

  double beta1 = 1e-3;  // L1 weight on the aspect indicator matrices
  double beta2 = 1e-3;  // L2 weight on factors and network parameters

  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  std::uint64_t seed = 42;
  model::ModelKind model = model::ModelKind::kRpr;
  model::Variant variant = model::Variant::kBase;
  bool epoch_schedule = false;     // rotate one update group per epoch
  bool freeze_embeddings = false;  // keep word vectors at their initial values
};

// Applies one `key = value` pair. Unknown keys and unparseable values throw
// ConfigError naming the offender.
void apply_config_entry(TrainConfig& config, const std::string& key,
                        const std::string& value);

// Flat key = value file; blank lines and lines starting with '#' are skipped.
TrainConfig parse_config_text(const std::string& text,
                              const std::string& origin,
                              TrainConfig base = TrainConfig{});
TrainConfig parse_config_file(const std::string& path,
                              TrainConfig base = TrainConfig{});

// Canonical snapshot of every field, in fixed key order. Feeding the entries
// back through apply_config_entry reproduces the config exactly.
std::map<std::string, std::string> config_entries(const TrainConfig& config);

// Rejects out-of-range fields (negative rates, even filter width, ...).
void validate(const TrainConfig& config);

// First-order moment state for one update group. Tensors parallel param_ids.
struct AdamState {
  std::vector<int> param_ids;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;
};

AdamState make_adam_state(const model::ModelParams& params,
                          std::vector<int> param_ids);

// Bias-corrected Adam on one group; every tensor outside the group is left
// untouched. A zero gradient advances the step counter but moves nothing.
// Non-finite gradients throw DivergenceError naming the parameter.
void adam_step(model::ModelParams& params,
               const std::array<Tensor, model::kNumParams>& grads,
               AdamState& state, double learning_rate, double beta1,
               double beta2, double epsilon);

// Scales every gradient in place when the global L2 norm (across all present
// tensors) exceeds max_norm; max_norm <= 0 disables. Returns the pre-clip
// norm.
double clip_global_norm(std::array<Tensor, model::kNumParams>& grads,
                        double max_norm);

// Sequential update groups: user factors, item factors, aspect indicators,
// then the text network (conv, heads, attention, embeddings). The plain
// dot-product baseline has just the two factor groups.
std::vector<std::vector<int>> update_groups(model::ModelKind kind,
                                            bool freeze_embeddings);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean per-batch objective
  double val_mse = 0.0;
  double val_mae = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;
  double best_val_mse = 0.0;
  bool diverged = false;

  // Header "epoch,train_loss,val_mse,val_mae,seconds", one row per epoch.
  void write_csv(std::ostream& out) const;
};

struct TrainResult {
  model::ModelParams params;  // best validation snapshot
  TrainHistory history;
};

// Full loop: shuffle, batch, backprop, clip, grouped Adam steps, then score
// the validation partition. Stops after `patience` epochs without a new best
// validation MSE and returns the best snapshot. When the validation split is
// empty the training partition stands in for it. On divergence the loop
// stops, keeps the last good snapshot, and sets history.diverged.
TrainResult train(const corpus::CorpusView& view, const TrainConfig& config);

// Hyperparameter grid. Aspect counts apply to both polarities at once.
struct GridSpec {
  std::vector<int> aspect_counts = {2};
  std::vector<int> latent_dims = {4, 8, 16, 32, 64};
  std::vector<double> learning_rates = {1e-5, 1e-4, 1e-3, 1e-2};
  std::vector<int> batch_sizes = {100, 200, 500, 1000};
};

struct GridCell {
  std::size_t index = 0;
  TrainConfig config;
  double val_mse = 0.0;
  double val_mae = 0.0;
  double test_mse = 0.0;
  double test_mae = 0.0;
  int best_epoch = -1;
  bool diverged = false;
};

struct GridResult {
  std::vector<GridCell> cells;
  std::size_t best = 0;
};

// Strict preference order for picking the winning cell: lower validation MSE,
// then smaller latent dimension, then fewer aspects, then smaller learning
// rate, batch size, and finally enumeration order. Diverged cells never win.
bool cell_preferred(const GridCell& lhs, const GridCell& rhs);

// Trains every cell (seed = base seed + cell index) and scores it on the
// validation and test partitions. `jobs` > 1 runs cells on worker threads;
// results are independent of the thread count.
GridResult grid_search(const corpus::CorpusView& view, const TrainConfig& base,
                       const GridSpec& spec, int jobs = 1);

// Header plus one row per cell, winner marked in the final column.
void write_grid_csv(const GridResult& result, std::ostream& out);

}  // namespace rpr::train
