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

#include <atomic>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "rpr/common.hpp"
#include "rpr/eval/eval.hpp"
#include "rpr/train/train.hpp"

namespace rpr::train {
namespace {

std::vector<GridCell> enumerate_cells(const TrainConfig& base,
                                      const GridSpec& spec) {
  if (spec.aspect_counts.empty() || spec.latent_dims.empty() ||
      spec.learning_rates.empty() || spec.batch_sizes.empty()) {
    throw ConfigError("grid axes must be non-empty");
  }
  std::vector<GridCell> cells;
  std::size_t index = 0;
  for (int aspects : spec.aspect_counts) {
    for (int f : spec.latent_dims) {
      for (double lr : spec.learning_rates) {
        for (int batch : spec.batch_sizes) {
          GridCell cell;
          cell.index = index;
          cell.config = base;
          cell.config.preferred_aspects = aspects;
          cell.config.rejected_aspects = aspects;
          cell.config.latent_dim = f;
          cell.config.learning_rate = lr;
          cell.config.batch_size = batch;
          cell.config.seed = base.seed + index;
          validate(cell.config);
          cells.push_back(std::move(cell));
          ++index;
        }
      }
    }
  }
  return cells;
}

void run_cell(const corpus::CorpusView& view, GridCell& cell) {
  TrainResult run = train(view, cell.config);
  cell.best_epoch = run.history.best_epoch;
  cell.diverged = run.history.diverged;
  if (run.history.best_epoch < 0) {
    // Diverged before the first full epoch; nothing was ever scored.
    cell.val_mse = std::numeric_limits<double>::infinity();
    cell.val_mae = std::numeric_limits<double>::infinity();
    cell.test_mse = std::numeric_limits<double>::infinity();
    cell.test_mae = std::numeric_limits<double>::infinity();
    return;
  }
  model::Predictor scorer(run.params, view);
  std::vector<corpus::CorpusView::Triple> val =
      view.partition(view.split.validation);
  if (val.empty()) val = view.partition(view.split.train);
  const eval::MetricsReport on_val = eval::score(scorer, val);
  cell.val_mse = on_val.mse;
  cell.val_mae = on_val.mae;
  const std::vector<corpus::CorpusView::Triple> test =
      view.partition(view.split.test);
  if (!test.empty()) {
    const eval::MetricsReport on_test = eval::score(scorer, test);
    cell.test_mse = on_test.mse;
    cell.test_mae = on_test.mae;
  }
}

}  // namespace

bool cell_preferred(const GridCell& lhs, const GridCell& rhs) {
  if (lhs.diverged != rhs.diverged) return !lhs.diverged;
  if (lhs.val_mse != rhs.val_mse) return lhs.val_mse < rhs.val_mse;
  if (lhs.config.latent_dim != rhs.config.latent_dim) {
    return lhs.config.latent_dim < rhs.config.latent_dim;
  }
  if (lhs.config.preferred_aspects != rhs.config.preferred_aspects) {
    return lhs.config.preferred_aspects < rhs.config.preferred_aspects;
  }
  if (lhs.config.learning_rate != rhs.config.learning_rate) {
    return lhs.config.learning_rate < rhs.config.learning_rate;
  }
  if (lhs.config.batch_size != rhs.config.batch_size) {
    return lhs.config.batch_size < rhs.config.batch_size;
  }
  return lhs.index < rhs.index;
}

GridResult grid_search(const corpus::CorpusView& view, const TrainConfig& base,
                       const GridSpec& spec, int jobs) {
  GridResult result;
  result.cells = enumerate_cells(base, spec);
  const int workers =
      std::max(1, std::min(jobs, static_cast<int>(result.cells.size())));
  if (workers == 1) {
    for (GridCell& cell : result.cells) run_cell(view, cell);
  } else {
    // Cells are independent (each carries its own seed), so any scheduling
    // yields the same numbers.
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (;;) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= result.cells.size()) break;
            run_cell(view, result.cells[k]);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  bool any_converged = false;
  for (std::size_t k = 0; k < result.cells.size(); ++k) {
    if (!result.cells[k].diverged) any_converged = true;
    if (cell_preferred(result.cells[k], result.cells[result.best])) {
      result.best = k;
    }
  }
  if (!any_converged) throw DivergenceError("every grid cell diverged");
  return result;
}

void write_grid_csv(const GridResult& result, std::ostream& out) {
  out << "index,latent_dim,aspects,learning_rate,batch_size,seed,best_epoch,"
         "diverged,val_mse,val_mae,test_mse,test_mae,selected\n";
  char buf[256];
  for (const GridCell& c : result.cells) {
    std::snprintf(buf, sizeof(buf),
                  "%zu,%d,%d,%.17g,%d,%llu,%d,%d,%.17g,%.17g,%.17g,%.17g,%d\n",
                  c.index, c.config.latent_dim, c.config.preferred_aspects,
                  c.config.learning_rate, c.config.batch_size,
                  static_cast<unsigned long long>(c.config.seed), c.best_epoch,
                  c.diverged ? 1 : 0, c.val_mse, c.val_mae, c.test_mse,
                  c.test_mae, c.index == result.best ? 1 : 0);
    out << buf;
  }
}

}  // namespace rpr::train
