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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"
#include "rpr/eval/eval.hpp"
#include "rpr/io/io.hpp"
#include "rpr/model/graph.hpp"
#include "rpr/model/model.hpp"
#include "rpr/train/train.hpp"

namespace py = pybind11;

namespace {

rpr::train::TrainConfig build_config(
    const std::map<std::string, std::string>& entries) {
  rpr::train::TrainConfig config;
  for (const auto& [key, value] : entries) {
    rpr::train::apply_config_entry(config, key, value);
  }
  rpr::train::validate(config);
  return config;
}

py::dict metrics_dict(const rpr::eval::MetricsReport& report) {
  py::dict out;
  out["mse"] = report.mse;
  out["mae"] = report.mae;
  out["n"] = report.count;
  return out;
}

}  // namespace

PYBIND11_MODULE(_rpr, m) {
  m.doc() = "review polarity-wise recommender core";

  static py::exception<rpr::Error> base_exc(m, "RprError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const rpr::DivergenceError& e) {
      base_exc(e.what());
    } catch (const rpr::Error& e) {
      base_exc(e.what());
    }
  });

  m.def("tokenize", &rpr::corpus::tokenize, py::arg("text"),
        "Lowercased word tokens with punctuation stripped.");

  m.def(
      "synth",
      [](const std::string& out_dir, int users, int items, int preferred,
         int rejected, double imbalance, double noise, std::uint64_t seed,
         int reviews_per_user, int words_per_review, int pool_size,
         bool uniform_importance, bool shared_pools, double rejected_mix) {
        rpr::corpus::SyntheticConfig config;
        config.n_users = users;
        config.n_items = items;
        config.n_preferred = preferred;
        config.n_rejected = rejected;
        config.imbalance_ratio = imbalance;
        config.noise = noise;
        config.seed = seed;
        config.reviews_per_user = reviews_per_user;
        config.words_per_review = words_per_review;
        config.pool_size = pool_size;
        config.uniform_importance = uniform_importance;
        config.shared_pools = shared_pools;
        config.rejected_mix = rejected_mix;
        auto [records, truth] = rpr::corpus::generate_synthetic(config);
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "records.ndjson",
                          std::ios::binary | std::ios::trunc);
        if (!out) throw rpr::DataError("cannot write records.ndjson");
        for (const rpr::corpus::InteractionRecord& r : records) {
          nlohmann::json j{{"user_id", r.user_id},
                           {"item_id", r.item_id},
                           {"rating", r.rating},
                           {"review", r.review}};
          out << j.dump() << "\n";
        }
        py::dict summary;
        summary["records"] = records.size();
        summary["path"] = (fs::path(out_dir) / "records.ndjson").string();
        return summary;
      },
      py::arg("out_dir"), py::arg("users"), py::arg("items"),
      py::arg("preferred") = 2, py::arg("rejected") = 2,
      py::arg("imbalance") = 0.5, py::arg("noise") = 0.0, py::arg("seed") = 0,
      py::arg("reviews_per_user") = 6, py::arg("words_per_review") = 6,
      py::arg("pool_size") = 12, py::arg("uniform_importance") = false,
      py::arg("shared_pools") = false, py::arg("rejected_mix") = 1.0,
      "Generate a planted synthetic corpus; returns a summary dict.");

  m.def(
      "prepare",
      [](const std::string& data_path, const std::string& cache_dir,
         const std::string& schema, std::uint64_t seed, double threshold,
         int max_doc_len, int min_count, int k_core, int embedding_dim,
         const std::string& embedding_path) {
        rpr::corpus::RecordSchema rs;
        if (schema == "amazon") {
          rs = rpr::corpus::RecordSchema::amazon();
        } else if (schema == "yelp") {
          rs = rpr::corpus::RecordSchema::yelp();
        } else if (schema == "generic") {
          rs = rpr::corpus::RecordSchema::generic();
        } else {
          throw rpr::UsageError("unknown schema '" + schema + "'");
        }
        auto [records, summary] = rpr::corpus::ingest_file(data_path, rs);
        rpr::corpus::PrepareOptions options;
        options.seed = seed;
        options.threshold = threshold;
        options.max_doc_len = max_doc_len;
        options.min_count = min_count;
        options.k_core = k_core;
        options.embedding_dim = embedding_dim;
        options.embedding_path = embedding_path;
        rpr::corpus::CorpusView view =
            rpr::corpus::prepare_corpus(records, options);
        rpr::io::save_corpus(view, cache_dir);
        py::dict out;
        out["kept"] = summary.kept;
        out["dropped_empty"] = summary.dropped_empty;
        out["dropped_range"] = summary.dropped_range;
        out["users"] = view.n_users();
        out["items"] = view.n_items();
        out["vocab"] = view.vocab.size();
        out["fingerprint"] = view.fingerprint;
        return out;
      },
      py::arg("data_path"), py::arg("cache_dir"),
      py::arg("schema") = "generic", py::arg("seed") = 42,
      py::arg("threshold") = 3.0, py::arg("max_doc_len") = 500,
      py::arg("min_count") = 1, py::arg("k_core") = 0,
      py::arg("embedding_dim") = 50, py::arg("embedding_path") = "",
      "Ingest NDJSON records and cache the encoded corpus.");

  m.def(
      "train",
      [](const std::string& cache_dir, const std::string& out_dir,
         const std::map<std::string, std::string>& config_entries) {
        const rpr::train::TrainConfig config = build_config(config_entries);
        const rpr::corpus::CorpusView view = rpr::io::load_corpus(cache_dir);
        const rpr::train::TrainResult result = rpr::train::train(view, config);
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        const std::string checkpoint =
            (fs::path(out_dir) / "checkpoint.bin").string();
        rpr::io::save_checkpoint(result.params, checkpoint);
        std::ofstream hist(fs::path(out_dir) / "history.csv",
                           std::ios::binary | std::ios::trunc);
        result.history.write_csv(hist);
        py::dict out;
        out["checkpoint"] = checkpoint;
        out["best_epoch"] = result.history.best_epoch;
        out["best_val_mse"] = result.history.best_val_mse;
        out["epochs"] = result.history.epochs.size();
        out["diverged"] = result.history.diverged;
        return out;
      },
      py::arg("cache_dir"), py::arg("out_dir"),
      py::arg("config") = std::map<std::string, std::string>{},
      "Train on a cached corpus; config keys match the config file.");

  m.def(
      "evaluate",
      [](const std::string& cache_dir, const std::string& checkpoint,
         const std::string& split, bool clip) {
        const rpr::corpus::CorpusView view = rpr::io::load_corpus(cache_dir);
        const rpr::model::ModelParams params =
            rpr::io::load_checkpoint(checkpoint);
        rpr::io::require_matching_corpus(params, view);
        rpr::model::Predictor predictor(params, view);
        const std::vector<int>* indices;
        if (split == "train") {
          indices = &view.split.train;
        } else if (split == "validation") {
          indices = &view.split.validation;
        } else if (split == "test") {
          indices = &view.split.test;
        } else {
          throw rpr::UsageError("unknown split '" + split + "'");
        }
        return metrics_dict(
            rpr::eval::score(predictor, view.partition(*indices), clip));
      },
      py::arg("cache_dir"), py::arg("checkpoint"), py::arg("split") = "test",
      py::arg("clip") = false, "Score a checkpoint on a corpus partition.");

  m.def(
      "predict",
      [](const std::string& cache_dir, const std::string& checkpoint,
         const std::string& user_id, const std::string& item_id) {
        const rpr::corpus::CorpusView view = rpr::io::load_corpus(cache_dir);
        const rpr::model::ModelParams params =
            rpr::io::load_checkpoint(checkpoint);
        rpr::io::require_matching_corpus(params, view);
        rpr::model::Predictor predictor(params, view);
        auto u = view.user_index.find(user_id);
        auto i = view.item_index.find(item_id);
        if (u == view.user_index.end()) {
          throw rpr::LookupError("user id '" + user_id +
                                 "' is not in the corpus");
        }
        if (i == view.item_index.end()) {
          throw rpr::LookupError("item id '" + item_id +
                                 "' is not in the corpus");
        }
        return predictor.predict(u->second, i->second);
      },
      py::arg("cache_dir"), py::arg("checkpoint"), py::arg("user_id"),
      py::arg("item_id"), "Predicted rating for one user, item pair.");

  m.def(
      "explain",
      [](const std::string& cache_dir, const std::string& checkpoint,
         const std::string& user_id, const std::string& item_id, int top_k) {
        const rpr::corpus::CorpusView view = rpr::io::load_corpus(cache_dir);
        const rpr::model::ModelParams params =
            rpr::io::load_checkpoint(checkpoint);
        rpr::io::require_matching_corpus(params, view);
        rpr::model::Predictor predictor(params, view);
        auto u = view.user_index.find(user_id);
        auto i = view.item_index.find(item_id);
        if (u == view.user_index.end()) {
          throw rpr::LookupError("user id '" + user_id +
                                 "' is not in the corpus");
        }
        if (i == view.item_index.end()) {
          throw rpr::LookupError("item id '" + item_id +
                                 "' is not in the corpus");
        }
        const rpr::eval::ExplanationReport report = rpr::eval::explain_rating(
            predictor, view, u->second, i->second, top_k);
        py::dict out;
        out["user"] = report.user_id;
        out["item"] = report.item_id;
        out["predicted"] = report.profile.r_hat;
        out["positive_term"] = report.profile.positive_term;
        out["negative_term"] = report.profile.negative_term;
        out["text"] = rpr::eval::format_explanation(report);
        return out;
      },
      py::arg("cache_dir"), py::arg("checkpoint"), py::arg("user_id"),
      py::arg("item_id"), py::arg("top_k") = 10,
      "Aspect-level breakdown of one prediction.");

  m.def(
      "gradcheck",
      [](std::uint64_t seed, int trials, const std::string& variant) {
        const rpr::model::GradcheckReport report =
            rpr::model::certify_gradients(seed, trials,
                                          rpr::model::parse_variant(variant));
        return report.max_rel_err;
      },
      py::arg("seed") = 7, py::arg("trials") = 10, py::arg("variant") = "base",
      "Max relative error of analytic gradients vs finite differences.");

  m.def(
      "checkpoint_info",
      [](const std::string& path) {
        const rpr::model::ModelParams params = rpr::io::load_checkpoint(path);
        py::dict out;
        out["model"] = rpr::model::model_kind_name(params.kind);
        out["variant"] = rpr::model::variant_name(params.variant);
        out["latent_dim"] = params.dims.latent_dim;
        out["preferred_aspects"] = params.dims.preferred_aspects;
        out["rejected_aspects"] = params.dims.rejected_aspects;
        out["users"] = params.dims.n_users;
        out["items"] = params.dims.n_items;
        out["vocab"] = params.dims.vocab_size;
        out["fingerprint"] = params.corpus_fingerprint;
        return out;
      },
      py::arg("path"), "Header fields of a model checkpoint.");
}
