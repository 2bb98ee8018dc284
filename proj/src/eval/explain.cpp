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
#include <sstream>
#include <unordered_map>

#include "rpr/common.hpp"
#include "rpr/eval/eval.hpp"
#include "rpr/primitives.hpp"

namespace rpr::eval {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void check_user(const corpus::CorpusView& view, int user) {
  if (user < 0 || user >= view.n_users()) {
    throw LookupError("unknown user index " + std::to_string(user));
  }
}

}  // namespace

std::vector<WordAssignment> classify_words(const model::ModelParams& params,
                                           const corpus::CorpusView& view,
                                           int user, model::Polarity side) {
  if (params.kind != model::ModelKind::kRpr) {
    throw ConfigError("the dot-product baseline carries no aspect words");
  }
  check_user(view, user);
  const bool preferred = side == model::Polarity::kPreferred;
  const corpus::PolarityDocuments& docs = view.documents[user];
  const std::vector<int>& doc = preferred ? docs.positive : docs.negative;
  std::vector<WordAssignment> out;
  if (doc.empty()) return out;

  // The per-word lens: every occurrence's pre-pool aspect weight vector,
  // averaged per distinct word. The coarse-grained variant pools before its
  // head, so this view is the base-style per-word computation in all cases.
  const Tensor& W =
      preferred ? params.preferred_head_weight : params.rejected_head_weight;
  const Tensor& b =
      preferred ? params.preferred_head_bias : params.rejected_head_bias;
  Tensor E = embed_tokens(params.word_embeddings, doc);
  Tensor C = conv_context_fw(E, params.conv_filters, params.conv_bias);
  Tensor H = rows_affine_relu_fw(C, W, b);
  const int aspects = H.dim(1);

  std::unordered_map<int, std::size_t> slot;
  for (std::size_t j = 0; j < doc.size(); ++j) {
    const int token = doc[j];
    auto it = slot.find(token);
    if (it == slot.end()) {
      it = slot.emplace(token, out.size()).first;
      WordAssignment w;
      w.word = view.vocab.tokens[static_cast<std::size_t>(token)];
      w.token = token;
      w.weights = Tensor({aspects});
      out.push_back(std::move(w));
    }
    WordAssignment& w = out[it->second];
    for (int a = 0; a < aspects; ++a) {
      w.weights.at(a) += H.at(static_cast<int>(j), a);
    }
    w.occurrences += 1;
  }
  for (WordAssignment& w : out) {
    int best = 0;
    for (int a = 0; a < aspects; ++a) {
      w.weights.at(a) /= w.occurrences;
      if (w.weights.at(a) > w.weights.at(best)) best = a;  // ties go low
    }
    w.aspect = best;
  }
  return out;
}

std::vector<AspectWords> top_aspect_words(const model::ModelParams& params,
                                          const corpus::CorpusView& view,
                                          int user, model::Polarity side,
                                          int top_k) {
  const std::vector<WordAssignment> assigned =
      classify_words(params, view, user, side);
  const int aspects = side == model::Polarity::kPreferred
                          ? params.dims.preferred_aspects
                          : params.dims.rejected_aspects;
  std::vector<AspectWords> out(static_cast<std::size_t>(aspects));
  for (int a = 0; a < aspects; ++a) out[static_cast<std::size_t>(a)].aspect = a;
  for (const WordAssignment& w : assigned) {
    // Rank by aspect weight scaled by how often the word shows up.
    const double score = w.weights.at(w.aspect) * w.occurrences;
    out[static_cast<std::size_t>(w.aspect)].words.emplace_back(w.word, score);
  }
  for (AspectWords& bucket : out) {
    std::sort(bucket.words.begin(), bucket.words.end(),
              [](const auto& lhs, const auto& rhs) {
                if (lhs.second != rhs.second) return lhs.second > rhs.second;
                return lhs.first < rhs.first;
              });
    if (top_k >= 0 && bucket.words.size() > static_cast<std::size_t>(top_k)) {
      bucket.words.resize(static_cast<std::size_t>(top_k));
    }
  }
  return out;
}

ExplanationReport explain_rating(model::Predictor& predictor,
                                 const corpus::CorpusView& view, int user,
                                 int item, int top_k) {
  check_user(view, user);
  if (item < 0 || item >= view.n_items()) {
    throw LookupError("unknown item index " + std::to_string(item));
  }
  ExplanationReport report;
  report.user_id = view.user_ids[static_cast<std::size_t>(user)];
  report.item_id = view.item_ids[static_cast<std::size_t>(item)];
  report.profile = predictor.profile(user, item);
  const model::ModelParams& params = predictor.params();
  const bool has_text = params.kind == model::ModelKind::kRpr &&
                        params.variant != model::Variant::kUniformImportance;
  if (has_text) {
    report.preferred_words = top_aspect_words(params, view, user,
                                              model::Polarity::kPreferred, top_k);
    report.rejected_words = top_aspect_words(params, view, user,
                                             model::Polarity::kRejected, top_k);
  }
  return report;
}

std::string format_explanation(const ExplanationReport& report) {
  std::ostringstream out;
  const model::AspectProfile& p = report.profile;
  out << "user " << report.user_id << " item " << report.item_id << "\n";
  out << "predicted " << num(p.r_hat) << "\n";
  if (p.s_p.rank() == 0 || p.s_p.numel() == 0) {
    // Dot-product baseline: the prediction is the whole story.
    return out.str();
  }
  out << "positive term " << num(p.positive_term) << "\n";
  out << "negative term " << num(p.negative_term) << "\n";
  out << "preferred aspects (importance offset score):\n";
  for (int a = 0; a < p.s_p.dim(0); ++a) {
    out << "  [" << a << "] " << num(p.rho_p_plus.at(a)) << " "
        << num(p.mu_p.at(a)) << " " << num(p.s_p.at(a)) << "\n";
  }
  out << "rejected aspects (importance offset score):\n";
  for (int a = 0; a < p.s_r.dim(0); ++a) {
    out << "  [" << a << "] " << num(p.rho_r_plus.at(a)) << " "
        << num(p.mu_r.at(a)) << " " << num(p.s_r.at(a)) << "\n";
  }
  auto words = [&out](const char* title, const std::vector<AspectWords>& side) {
    if (side.empty()) return;
    out << title << "\n";
    for (const AspectWords& bucket : side) {
      out << "  aspect " << bucket.aspect << ":";
      for (const auto& [word, score] : bucket.words) out << " " << word;
      out << "\n";
    }
  };
  words("top preferred words:", report.preferred_words);
  words("top rejected words:", report.rejected_words);
  return out.str();
}

}  // namespace rpr::eval
