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
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rpr/cli/commands.hpp"
#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"
#include "rpr/eval/eval.hpp"
#include "rpr/io/io.hpp"
#include "rpr/model/graph.hpp"
#include "rpr/model/model.hpp"
#include "rpr/train/train.hpp"

namespace rpr::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kGradcheckTolerance = 1e-4;

std::string resolve_cache(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("RPR_CACHE_DIR");
  if (env != nullptr && *env != '\0') return env;
  throw UsageError("no corpus cache given: pass --cache or set RPR_CACHE_DIR");
}

corpus::RecordSchema schema_by_name(const std::string& name) {
  if (name == "amazon") return corpus::RecordSchema::amazon();
  if (name == "yelp") return corpus::RecordSchema::yelp();
  if (name == "generic") return corpus::RecordSchema::generic();
  throw UsageError("unknown schema '" + name +
                   "' (expected amazon, yelp, or generic)");
}

int lookup_index(const std::unordered_map<std::string, int>& index,
                 const std::string& id, const char* kind) {
  auto it = index.find(id);
  if (it == index.end()) {
    throw LookupError(std::string(kind) + " id '" + id +
                      "' is not in the corpus");
  }
  return it->second;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    try {
      out.push_back(std::stoi(piece));
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": '" + piece +
                       "' is not an integer");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": '" + piece +
                       "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

std::vector<uint64_t> parse_seed_list(const std::string& text) {
  std::vector<uint64_t> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    try {
      out.push_back(std::stoull(piece));
    } catch (const std::exception&) {
      throw UsageError(std::string("--seeds: '") + piece +
                       "' is not a seed");
    }
  }
  if (out.empty()) throw UsageError("--seeds: empty list");
  return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out.flush()) throw DataError("short write to '" + path.string() + "'");
}

// Shared hyperparameter plumbing: optional config file, then per-flag
// overrides on top. Every override routes through apply_config_entry so the
// CLI and the file accept exactly the same keys.
struct ConfigArgs {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  void add_flags(CLI::App* cmd, bool include_model_shape = true) {
    cmd->add_option("--config", config_path,
                    "training config file (key = value lines)");
    auto pass = [this](const std::string& key) {
      return [this, key](const std::string& value) {
        overrides.emplace_back(key, value);
      };
    };
    cmd->add_option_function<std::string>("--seed", pass("seed"),
                                          "base random seed");
    cmd->add_option_function<std::string>("--lr", pass("learning_rate"),
                                          "Adam learning rate");
    cmd->add_option_function<std::string>("--batch-size", pass("batch_size"),
                                          "examples per batch");
    cmd->add_option_function<std::string>("--epochs", pass("max_epochs"),
                                          "epoch cap");
    cmd->add_option_function<std::string>("--patience", pass("patience"),
                                          "early-stop patience in epochs");
    cmd->add_option_function<std::string>("--dropout", pass("dropout"),
                                          "dropout rate after conv and heads");
    cmd->add_option_function<std::string>("--clip-norm", pass("clip_norm"),
                                          "global gradient norm cap (<=0 off)");
    cmd->add_option_function<std::string>("--beta1", pass("beta1"),
                                          "L1 weight on indicators");
    cmd->add_option_function<std::string>("--beta2", pass("beta2"),
                                          "L2 weight on factors and nets");
    if (include_model_shape) {
      cmd->add_option_function<std::string>("--latent-dim", pass("latent_dim"),
                                            "factor dimension");
      cmd->add_option_function<std::string>(
          "--aspects",
          [this](const std::string& value) {
            overrides.emplace_back("preferred_aspects", value);
            overrides.emplace_back("rejected_aspects", value);
          },
          "aspect count on both sides");
      cmd->add_option_function<std::string>("--model", pass("model"),
                                            "rpr or mf");
      cmd->add_option_function<std::string>("--variant", pass("variant"),
                                            "model variant");
    }
    cmd->add_option_function<std::string>(
        "--epoch-schedule", pass("epoch_schedule"),
        "rotate one update group per epoch (true/false)");
    cmd->add_option_function<std::string>(
        "--freeze-embeddings", pass("freeze_embeddings"),
        "keep word vectors fixed (true/false)");
  }

  train::TrainConfig resolve() const {
    train::TrainConfig config;
    if (!config_path.empty()) {
      config = train::parse_config_file(config_path);
    }
    for (const auto& [key, value] : overrides) {
      train::apply_config_entry(config, key, value);
    }
    train::validate(config);
    return config;
  }
};

// --- synth ------------------------------------------------------------------

struct SynthArgs {
  corpus::SyntheticConfig config;
  std::string out_dir;
};

int cmd_synth(const SynthArgs& args) {
  auto [records, truth] = corpus::generate_synthetic(args.config);

  const fs::path root(args.out_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw DataError("cannot create directory '" + args.out_dir + "'");

  {
    std::ofstream out(root / "records.ndjson", std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write records.ndjson");
    for (const corpus::InteractionRecord& r : records) {
      json j{{"user_id", r.user_id},
             {"item_id", r.item_id},
             {"rating", r.rating},
             {"review", r.review}};
      out << j.dump() << "\n";
    }
    if (!out.flush()) throw DataError("short write to records.ndjson");
  }
  {
    json j{{"amplitude", truth.amplitude},
           {"user_preferred", truth.user_preferred},
           {"user_rejected", truth.user_rejected},
           {"item_preferred", truth.item_preferred},
           {"item_rejected", truth.item_rejected},
           {"preferred_pools", truth.preferred_pools},
           {"rejected_pools", truth.rejected_pools}};
    write_text_file(root / "truth.json", j.dump(2) + "\n");
  }

  io::RunManifest manifest;
  manifest.command = "synth";
  manifest.seed = args.config.seed;
  manifest.config["n_users"] = std::to_string(args.config.n_users);
  manifest.config["n_items"] = std::to_string(args.config.n_items);
  manifest.config["n_preferred"] = std::to_string(args.config.n_preferred);
  manifest.config["n_rejected"] = std::to_string(args.config.n_rejected);
  manifest.config["imbalance_ratio"] = std::to_string(args.config.imbalance_ratio);
  manifest.config["noise"] = std::to_string(args.config.noise);
  manifest.config["reviews_per_user"] = std::to_string(args.config.reviews_per_user);
  manifest.config["words_per_review"] = std::to_string(args.config.words_per_review);
  manifest.config["pool_size"] = std::to_string(args.config.pool_size);
  manifest.config["uniform_importance"] =
      args.config.uniform_importance ? "true" : "false";
  manifest.config["shared_pools"] = args.config.shared_pools ? "true" : "false";
  manifest.config["rejected_mix"] = std::to_string(args.config.rejected_mix);
  io::write_run_manifest(manifest, args.out_dir);

  std::printf("wrote %zu records for %d users and %d items to %s\n",
              records.size(), args.config.n_users, args.config.n_items,
              args.out_dir.c_str());
  return 0;
}

// --- prepare ----------------------------------------------------------------

struct PrepareArgs {
  std::string data_path;
  std::string schema = "amazon";
  std::string cache;
  corpus::PrepareOptions options;
};

int cmd_prepare(const PrepareArgs& args) {
  const std::string cache = resolve_cache(args.cache);
  auto [records, summary] =
      corpus::ingest_file(args.data_path, schema_by_name(args.schema));
  corpus::EmbeddingLoadReport embed_report;
  corpus::CorpusView view =
      corpus::prepare_corpus(records, args.options, &embed_report);
  io::save_corpus(view, cache);

  io::RunManifest manifest;
  manifest.command = "prepare";
  manifest.seed = args.options.seed;
  manifest.input_digests[args.data_path] = io::file_digest(args.data_path);
  if (!args.options.embedding_path.empty()) {
    manifest.input_digests[args.options.embedding_path] =
        io::file_digest(args.options.embedding_path);
  }
  manifest.config["schema"] = args.schema;
  manifest.config["train_frac"] = std::to_string(args.options.train_frac);
  manifest.config["val_frac"] = std::to_string(args.options.val_frac);
  manifest.config["threshold"] = std::to_string(args.options.threshold);
  manifest.config["max_doc_len"] = std::to_string(args.options.max_doc_len);
  manifest.config["min_count"] = std::to_string(args.options.min_count);
  manifest.config["k_core"] = std::to_string(args.options.k_core);
  manifest.config["embedding_dim"] = std::to_string(args.options.embedding_dim);
  io::write_run_manifest(manifest, cache);

  std::printf("kept %zu records (dropped %zu empty, %zu out of range)\n",
              summary.kept, summary.dropped_empty, summary.dropped_range);
  std::printf("%d users, %d items, vocabulary %d, split %zu/%zu/%zu\n",
              view.n_users(), view.n_items(), view.vocab.size(),
              view.split.train.size(), view.split.validation.size(),
              view.split.test.size());
  if (!args.options.embedding_path.empty()) {
    std::printf("embedding coverage %.1f%% (%zu found, %zu random)\n",
                100.0 * embed_report.coverage, embed_report.found,
                embed_report.missing);
  }
  std::printf("corpus fingerprint %016llx cached at %s\n",
              static_cast<unsigned long long>(view.fingerprint),
              cache.c_str());
  return 0;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string cache;
  std::string out_dir = ".";
  ConfigArgs config;
};

int cmd_train(const TrainArgs& args) {
  const std::string cache = resolve_cache(args.cache);
  const train::TrainConfig config = args.config.resolve();
  const corpus::CorpusView view = io::load_corpus(cache);
  const train::TrainResult result = train::train(view, config);

  const fs::path root(args.out_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw DataError("cannot create directory '" + args.out_dir + "'");

  io::save_checkpoint(result.params, (root / "checkpoint.bin").string());
  {
    std::ofstream out(root / "history.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write history.csv");
    result.history.write_csv(out);
  }
  io::RunManifest manifest;
  manifest.command = "train";
  manifest.seed = config.seed;
  manifest.config = train::config_entries(config);
  manifest.input_digests[cache + "/meta.json"] =
      io::file_digest((fs::path(cache) / "meta.json").string());
  io::write_run_manifest(manifest, args.out_dir);

  for (const train::EpochStats& e : result.history.epochs) {
    std::printf("epoch %d: loss %.6f val mse %.6f mae %.6f (%.1fs)\n", e.epoch,
                e.train_loss, e.val_mse, e.val_mae, e.seconds);
  }
  if (result.history.diverged) {
    std::fprintf(stderr,
                 "training diverged; kept the best earlier snapshot%s\n",
                 result.history.best_epoch < 0 ? " (initial parameters)" : "");
    return 3;
  }
  std::printf("best epoch %d with validation mse %.6f; checkpoint at %s\n",
              result.history.best_epoch, result.history.best_val_mse,
              (root / "checkpoint.bin").string().c_str());
  return 0;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string cache;
  std::string checkpoint;
  std::string split = "test";
  bool clip = false;
  std::string records_path;  // external records instead of a split
  std::string schema = "generic";
  bool fallback_mean = false;
  std::string out_dir;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const std::string cache = resolve_cache(args.cache);
  const corpus::CorpusView view = io::load_corpus(cache);
  const model::ModelParams params = io::load_checkpoint(args.checkpoint);
  io::require_matching_corpus(params, view);
  model::Predictor predictor(params, view);

  eval::MetricsReport report;
  std::string label;
  if (!args.records_path.empty()) {
    auto [records, summary] =
        corpus::ingest_file(args.records_path, schema_by_name(args.schema));
    (void)summary;
    report = eval::score_records(predictor, view, records, args.clip,
                                 args.fallback_mean);
    label = args.records_path;
  } else {
    const std::vector<int>* indices = nullptr;
    if (args.split == "train") {
      indices = &view.split.train;
    } else if (args.split == "validation") {
      indices = &view.split.validation;
    } else if (args.split == "test") {
      indices = &view.split.test;
    } else {
      throw UsageError("unknown split '" + args.split +
                       "' (expected train, validation, or test)");
    }
    report = eval::score(predictor, view.partition(*indices), args.clip);
    label = args.split;
  }

  std::printf("%s: mse %.6f mae %.6f over %zu examples%s\n", label.c_str(),
              report.mse, report.mae, report.count,
              args.clip ? " (clipped)" : "");

  if (!args.out_dir.empty()) {
    const fs::path root(args.out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw DataError("cannot create directory '" + args.out_dir + "'");
    char buf[160];
    std::snprintf(buf, sizeof(buf), "split,mse,mae,n\n%s,%.17g,%.17g,%zu\n",
                  label.c_str(), report.mse, report.mae, report.count);
    write_text_file(root / "metrics.csv", buf);
    io::RunManifest manifest;
    manifest.command = "evaluate";
    manifest.config["split"] = label;
    manifest.config["clip"] = args.clip ? "true" : "false";
    manifest.input_digests[args.checkpoint] = io::file_digest(args.checkpoint);
    io::write_run_manifest(manifest, args.out_dir);
  }
  return 0;
}

// --- explain ----------------------------------------------------------------

struct ExplainArgs {
  std::string cache;
  std::string checkpoint;
  std::string user_id;
  std::string item_id;
  int top_k = 10;
  std::string out_dir;
};

int cmd_explain(const ExplainArgs& args) {
  const std::string cache = resolve_cache(args.cache);
  const corpus::CorpusView view = io::load_corpus(cache);
  const model::ModelParams params = io::load_checkpoint(args.checkpoint);
  io::require_matching_corpus(params, view);
  model::Predictor predictor(params, view);

  const int user = lookup_index(view.user_index, args.user_id, "user");
  const int item = lookup_index(view.item_index, args.item_id, "item");
  const eval::ExplanationReport report =
      eval::explain_rating(predictor, view, user, item, args.top_k);
  const std::string text = eval::format_explanation(report);
  std::fputs(text.c_str(), stdout);

  if (!args.out_dir.empty()) {
    const fs::path root(args.out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw DataError("cannot create directory '" + args.out_dir + "'");
    write_text_file(root / "explanation.txt", text);
    io::RunManifest manifest;
    manifest.command = "explain";
    manifest.config["user"] = args.user_id;
    manifest.config["item"] = args.item_id;
    manifest.config["top_k"] = std::to_string(args.top_k);
    manifest.input_digests[args.checkpoint] = io::file_digest(args.checkpoint);
    io::write_run_manifest(manifest, args.out_dir);
  }
  return 0;
}

// --- ablate -----------------------------------------------------------------

struct AblateArgs {
  std::string cache;
  std::string seeds = "42,43,44";
  std::string out_dir;
  ConfigArgs config;
};

int cmd_ablate(const AblateArgs& args) {
  const std::string cache = resolve_cache(args.cache);
  const train::TrainConfig base = args.config.resolve();
  if (base.model != model::ModelKind::kRpr) {
    throw UsageError("ablate sweeps the rpr variants; drop --model");
  }
  const std::vector<uint64_t> seeds = parse_seed_list(args.seeds);
  const corpus::CorpusView view = io::load_corpus(cache);
  std::vector<corpus::CorpusView::Triple> test =
      view.partition(view.split.test);
  if (test.empty()) test = view.partition(view.split.train);

  struct Row {
    model::Variant variant;
    std::vector<double> mse;
    std::vector<double> mae;
  };
  std::vector<Row> rows;
  for (model::Variant variant : model::all_variants()) {
    Row row{variant, {}, {}};
    for (uint64_t seed : seeds) {
      train::TrainConfig config = base;
      config.variant = variant;
      config.seed = seed;
      const train::TrainResult result = train::train(view, config);
      model::Predictor predictor(result.params, view);
      const eval::MetricsReport report = eval::score(predictor, test);
      row.mse.push_back(report.mse);
      row.mae.push_back(report.mae);
      std::printf("%s seed %llu: test mse %.6f mae %.6f%s\n",
                  model::variant_name(variant),
                  static_cast<unsigned long long>(seed), report.mse,
                  report.mae, result.history.diverged ? " (diverged)" : "");
    }
    rows.push_back(std::move(row));
  }

  std::ostringstream csv;
  csv << "variant,median_test_mse,median_test_mae";
  for (uint64_t seed : seeds) {
    csv << ",mse_seed_" << seed << ",mae_seed_" << seed;
  }
  csv << "\n";
  std::printf("\n%-20s %12s %12s\n", "variant", "median mse", "median mae");
  char buf[64];
  for (const Row& row : rows) {
    const double med_mse = median(row.mse);
    const double med_mae = median(row.mae);
    std::printf("%-20s %12.6f %12.6f\n", model::variant_name(row.variant),
                med_mse, med_mae);
    csv << model::variant_name(row.variant);
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", med_mse, med_mae);
    csv << buf;
    for (std::size_t k = 0; k < row.mse.size(); ++k) {
      std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", row.mse[k], row.mae[k]);
      csv << buf;
    }
    csv << "\n";
  }

  if (!args.out_dir.empty()) {
    const fs::path root(args.out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw DataError("cannot create directory '" + args.out_dir + "'");
    write_text_file(root / "ablation.csv", csv.str());
    io::RunManifest manifest;
    manifest.command = "ablate";
    manifest.seed = base.seed;
    manifest.config = train::config_entries(base);
    manifest.config["seeds"] = args.seeds;
    io::write_run_manifest(manifest, args.out_dir);
  }
  return 0;
}

// --- sweep ------------------------------------------------------------------

struct SweepArgs {
  std::string cache;
  std::string aspects;
  std::string latent_dims;
  std::string learning_rates;
  std::string batch_sizes;
  int jobs = 1;
  std::string out_dir;
  ConfigArgs config;
};

int cmd_sweep(const SweepArgs& args) {
  const std::string cache = resolve_cache(args.cache);
  const train::TrainConfig base = args.config.resolve();
  train::GridSpec spec;
  if (!args.aspects.empty()) {
    spec.aspect_counts = parse_int_list(args.aspects, "--aspects");
  }
  if (!args.latent_dims.empty()) {
    spec.latent_dims = parse_int_list(args.latent_dims, "--latent-dims");
  }
  if (!args.learning_rates.empty()) {
    spec.learning_rates = parse_double_list(args.learning_rates, "--lrs");
  }
  if (!args.batch_sizes.empty()) {
    spec.batch_sizes = parse_int_list(args.batch_sizes, "--batch-sizes");
  }
  const corpus::CorpusView view = io::load_corpus(cache);
  const train::GridResult result =
      train::grid_search(view, base, spec, args.jobs);

  const train::GridCell& best = result.cells[result.best];
  std::printf("swept %zu cells; best index %zu: latent_dim %d aspects %d "
              "lr %g batch %d -> val mse %.6f test mse %.6f\n",
              result.cells.size(), best.index, best.config.latent_dim,
              best.config.preferred_aspects, best.config.learning_rate,
              best.config.batch_size, best.val_mse, best.test_mse);

  if (!args.out_dir.empty()) {
    const fs::path root(args.out_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw DataError("cannot create directory '" + args.out_dir + "'");
    std::ofstream out(root / "grid.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write grid.csv");
    train::write_grid_csv(result, out);
    io::RunManifest manifest;
    manifest.command = "sweep";
    manifest.seed = base.seed;
    manifest.config = train::config_entries(base);
    manifest.config["jobs"] = std::to_string(args.jobs);
    io::write_run_manifest(manifest, args.out_dir);
  }
  return 0;
}

// --- gradcheck --------------------------------------------------------------

struct GradcheckArgs {
  uint64_t seed = 7;
  int trials = 10;
  std::string variant = "base";
};

int cmd_gradcheck(const GradcheckArgs& args) {
  const model::Variant variant = model::parse_variant(args.variant);
  const model::GradcheckReport report =
      model::certify_gradients(args.seed, args.trials, variant);
  for (std::size_t t = 0; t < report.trials.size(); ++t) {
    std::printf("trial %zu (seed %llu): max relative error %.3e (%s)\n", t,
                static_cast<unsigned long long>(report.trials[t].seed),
                report.trials[t].max_rel_err,
                report.trials[t].worst_param.empty()
                    ? "-"
                    : report.trials[t].worst_param.c_str());
  }
  std::printf("overall max relative error %.3e against tolerance %.0e\n",
              report.max_rel_err, kGradcheckTolerance);
  if (report.max_rel_err >= kGradcheckTolerance) {
    std::fprintf(stderr, "gradient certification FAILED (worst: %s)\n",
                 report.worst_param.c_str());
    return 3;
  }
  std::printf("gradients certified\n");
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"review polarity-wise recommender"};
  app.require_subcommand(1);
  std::function<int()> action;

  auto synth_args = std::make_shared<SynthArgs>();
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a planted synthetic review corpus");
  synth->add_option("--users", synth_args->config.n_users, "user count")
      ->required();
  synth->add_option("--items", synth_args->config.n_items, "item count")
      ->required();
  synth->add_option("--preferred", synth_args->config.n_preferred,
                    "planted preferred aspects");
  synth->add_option("--rejected", synth_args->config.n_rejected,
                    "planted rejected aspects");
  synth->add_option("--imbalance", synth_args->config.imbalance_ratio,
                    "share of positive reviews per user");
  synth->add_option("--noise", synth_args->config.noise,
                    "rating noise stddev");
  synth->add_option("--seed", synth_args->config.seed, "random seed");
  synth->add_option("--reviews-per-user", synth_args->config.reviews_per_user,
                    "reviews per user");
  synth->add_option("--words-per-review", synth_args->config.words_per_review,
                    "words per review");
  synth->add_option("--pool-size", synth_args->config.pool_size,
                    "planted words per aspect");
  synth->add_flag("--uniform-importance",
                  synth_args->config.uniform_importance,
                  "plant uniform importance vectors");
  synth->add_flag("--shared-pools", synth_args->config.shared_pools,
                  "draw both polarities from one aspect vocabulary");
  synth->add_option("--rejected-mix", synth_args->config.rejected_mix,
                    "how strongly rejected importance mirrors preferred "
                    "importance (1 copies, 0 is independent)");
  synth->add_option("--out", synth_args->out_dir, "output directory")
      ->required();
  synth->callback([&action, synth_args] {
    action = [synth_args] { return cmd_synth(*synth_args); };
  });

  auto prepare_args = std::make_shared<PrepareArgs>();
  CLI::App* prepare = app.add_subcommand(
      "prepare", "ingest records and cache an encoded corpus");
  prepare->add_option("--data", prepare_args->data_path,
                      "NDJSON records file")
      ->required();
  prepare->add_option("--schema", prepare_args->schema,
                      "record schema: amazon, yelp, or generic");
  prepare->add_option("--cache", prepare_args->cache,
                      "cache directory (or RPR_CACHE_DIR)");
  prepare->add_option("--seed", prepare_args->options.seed, "split seed");
  prepare->add_option("--train-frac", prepare_args->options.train_frac,
                      "training share");
  prepare->add_option("--val-frac", prepare_args->options.val_frac,
                      "validation share carved from train");
  prepare->add_option("--threshold", prepare_args->options.threshold,
                      "polarity threshold on ratings");
  prepare->add_option("--max-doc-len", prepare_args->options.max_doc_len,
                      "token cap per polarity document");
  prepare->add_option("--min-count", prepare_args->options.min_count,
                      "vocabulary frequency floor");
  prepare->add_option("--k-core", prepare_args->options.k_core,
                      "iterative k-core filter (0 off)");
  prepare->add_option("--embedding-dim", prepare_args->options.embedding_dim,
                      "word embedding dimension");
  prepare->add_option("--embeddings", prepare_args->options.embedding_path,
                      "pretrained embedding text file");
  prepare->callback([&action, prepare_args] {
    action = [prepare_args] { return cmd_prepare(*prepare_args); };
  });

  auto train_args = std::make_shared<TrainArgs>();
  CLI::App* train_cmd =
      app.add_subcommand("train", "train a model on a cached corpus");
  train_cmd->add_option("--cache", train_args->cache,
                        "cache directory (or RPR_CACHE_DIR)");
  train_cmd->add_option("--out", train_args->out_dir,
                        "output directory for checkpoint and history");
  train_args->config.add_flags(train_cmd);
  train_cmd->callback([&action, train_args] {
    action = [train_args] { return cmd_train(*train_args); };
  });

  auto evaluate_args = std::make_shared<EvaluateArgs>();
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score a checkpoint on a partition");
  evaluate->add_option("--cache", evaluate_args->cache,
                       "cache directory (or RPR_CACHE_DIR)");
  evaluate->add_option("--checkpoint", evaluate_args->checkpoint,
                       "model checkpoint")
      ->required();
  evaluate->add_option("--split", evaluate_args->split,
                       "train, validation, or test");
  evaluate->add_flag("--clip-predictions", evaluate_args->clip,
                     "clip predictions to the 1..5 scale");
  evaluate->add_option("--records", evaluate_args->records_path,
                       "score an external NDJSON file instead of a split");
  evaluate->add_option("--schema", evaluate_args->schema,
                       "schema for --records");
  evaluate->add_flag("--fallback-mean", evaluate_args->fallback_mean,
                     "predict the training mean for unseen ids");
  evaluate->add_option("--out", evaluate_args->out_dir,
                       "directory for metrics.csv");
  evaluate->callback([&action, evaluate_args] {
    action = [evaluate_args] { return cmd_evaluate(*evaluate_args); };
  });

  auto explain_args = std::make_shared<ExplainArgs>();
  CLI::App* explain = app.add_subcommand(
      "explain", "break one prediction into aspects and words");
  explain->add_option("--cache", explain_args->cache,
                      "cache directory (or RPR_CACHE_DIR)");
  explain->add_option("--checkpoint", explain_args->checkpoint,
                      "model checkpoint")
      ->required();
  explain->add_option("--user", explain_args->user_id, "user id")->required();
  explain->add_option("--item", explain_args->item_id, "item id")->required();
  explain->add_option("--top-k", explain_args->top_k, "words per aspect");
  explain->add_option("--out", explain_args->out_dir,
                      "directory for explanation.txt");
  explain->callback([&action, explain_args] {
    action = [explain_args] { return cmd_explain(*explain_args); };
  });

  auto ablate_args = std::make_shared<AblateArgs>();
  CLI::App* ablate = app.add_subcommand(
      "ablate", "train every variant across seeds and compare");
  ablate->add_option("--cache", ablate_args->cache,
                     "cache directory (or RPR_CACHE_DIR)");
  ablate->add_option("--seeds", ablate_args->seeds,
                     "comma-separated seed list");
  ablate->add_option("--out", ablate_args->out_dir,
                     "directory for ablation.csv");
  ablate_args->config.add_flags(ablate);
  ablate->callback([&action, ablate_args] {
    action = [ablate_args] { return cmd_ablate(*ablate_args); };
  });

  auto sweep_args = std::make_shared<SweepArgs>();
  CLI::App* sweep = app.add_subcommand(
      "sweep", "grid-search hyperparameters on the validation split");
  sweep->add_option("--cache", sweep_args->cache,
                    "cache directory (or RPR_CACHE_DIR)");
  sweep->add_option("--aspects", sweep_args->aspects,
                    "comma-separated aspect counts");
  sweep->add_option("--latent-dims", sweep_args->latent_dims,
                    "comma-separated factor dimensions");
  sweep->add_option("--lrs", sweep_args->learning_rates,
                    "comma-separated learning rates");
  sweep->add_option("--batch-sizes", sweep_args->batch_sizes,
                    "comma-separated batch sizes");
  sweep->add_option("--jobs", sweep_args->jobs, "worker threads");
  sweep->add_option("--out", sweep_args->out_dir, "directory for grid.csv");
  sweep_args->config.add_flags(sweep, /*include_model_shape=*/false);
  sweep->callback([&action, sweep_args] {
    action = [sweep_args] { return cmd_sweep(*sweep_args); };
  });

  auto gradcheck_args = std::make_shared<GradcheckArgs>();
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "certify analytic gradients against finite differences");
  gradcheck->add_option("--seed", gradcheck_args->seed, "random seed");
  gradcheck->add_option("--trials", gradcheck_args->trials, "trial count");
  gradcheck->add_option("--variant", gradcheck_args->variant,
                        "model variant to certify");
  gradcheck->callback([&action, gradcheck_args] {
    action = [gradcheck_args] { return cmd_gradcheck(*gradcheck_args); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (!action) {
    std::cerr << app.help();
    return 1;
  }
  try {
    return action();
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace rpr::cli
