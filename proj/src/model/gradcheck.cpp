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

#include <cmath>
#include <cstdlib>
#include <vector>

#include "rpr/common.hpp"
#include "rpr/finite_diff.hpp"
#include "rpr/model/graph.hpp"
#include "rpr/model/model.hpp"

namespace rpr::model {
namespace {

// Finite differences step across ReLU kinks when a pre-activation sits too
// close to zero, so divergence there is a property of the probe rather than
// a wrong gradient. Instances inside this margin are redrawn.
constexpr double kKinkMargin = 1e-3;
constexpr double kTolFloor = 1e-8;

struct ToyInstance {
  ModelParams params;
  std::vector<corpus::PolarityDocuments> documents;
  std::vector<corpus::CorpusView::Triple> batch;
};

// Smallest |pre-activation| across every ReLU the given document exercises,
// recomputed with plain loops (the filter must not trust the code under
// test). For the coarse-grained variant the per-column max-pool gap counts
// as a kink too.
double document_margin(const ModelParams& p, const std::vector<int>& doc,
                       const Tensor& head_w, const Tensor& head_b,
                       Variant variant) {
  if (doc.empty()) return 1.0;
  const int l = static_cast<int>(doc.size());
  const int d = p.dims.embed_dim;
  const int nf = p.dims.n_filters;
  const int half = (p.dims.filter_width - 1) / 2;
  double margin = 1e30;

  std::vector<std::vector<double>> relu_c(static_cast<std::size_t>(l),
                                          std::vector<double>(nf, 0.0));
  for (int j = 0; j < l; ++j) {
    for (int k = 0; k < nf; ++k) {
      double pre = p.conv_bias.at(k);
      for (int o = -half; o <= half; ++o) {
        const int row = j + o;
        if (row < 0 || row >= l) continue;
        for (int dd = 0; dd < d; ++dd) {
          pre += p.conv_filters.at(o + half, dd, k) *
                 p.word_embeddings.at(doc[static_cast<std::size_t>(row)], dd);
        }
      }
      margin = std::min(margin, std::fabs(pre));
      relu_c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
          pre > 0 ? pre : 0.0;
    }
  }

  const int aspects = head_w.dim(0);
  if (variant == Variant::kCoarseGrained) {
    std::vector<double> pooled(static_cast<std::size_t>(nf), 0.0);
    for (int k = 0; k < nf; ++k) {
      double top = -1e30, second = -1e30;
      for (int j = 0; j < l; ++j) {
        const double v = relu_c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        if (v > top) {
          second = top;
          top = v;
        } else if (v > second) {
          second = v;
        }
      }
      pooled[static_cast<std::size_t>(k)] = top;
      if (l > 1) margin = std::min(margin, std::fabs(top - second));
    }
    for (int a = 0; a < aspects; ++a) {
      double pre = head_b.at(a);
      for (int k = 0; k < nf; ++k) {
        pre += head_w.at(a, k) * pooled[static_cast<std::size_t>(k)];
      }
      margin = std::min(margin, std::fabs(pre));
    }
    return margin;
  }

  for (int j = 0; j < l; ++j) {
    for (int a = 0; a < aspects; ++a) {
      double pre = head_b.at(a);
      for (int k = 0; k < nf; ++k) {
        pre += head_w.at(a, k) * relu_c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      }
      margin = std::min(margin, std::fabs(pre));
    }
  }
  return margin;
}

double instance_margin(const ToyInstance& inst) {
  const ModelParams& p = inst.params;
  double margin = 1e30;
  const bool merged_docs = p.variant == Variant::kNoPolarity;
  if (p.variant != Variant::kUniformImportance) {
    for (const corpus::PolarityDocuments& docs : inst.documents) {
      const std::vector<int>& doc_p = merged_docs ? docs.merged : docs.positive;
      const std::vector<int>& doc_r = merged_docs ? docs.merged : docs.negative;
      margin = std::min(
          margin, document_margin(p, doc_p, p.preferred_head_weight,
                                  p.preferred_head_bias, p.variant));
      margin = std::min(
          margin, document_margin(p, doc_r, p.rejected_head_weight,
                                  p.rejected_head_bias, p.variant));
    }
  }

  const bool offsets = p.variant == Variant::kBase ||
                       p.variant == Variant::kCoarseGrained ||
                       p.variant == Variant::kNoPolarity;
  if (offsets) {
    const int f = p.dims.latent_dim;
    const int hid = p.dims.attention_hidden;
    for (int x = 0; x < p.dims.preferred_aspects; ++x) {
      for (int y = 0; y < p.dims.rejected_aspects; ++y) {
        for (int k = 0; k < hid; ++k) {
          double pre = p.attention_bias.at(k);
          for (int j = 0; j < f; ++j) {
            pre += p.attention_weight.at(k, j) *
                   p.rejected_indicators.at(j, y) *
                   p.preferred_indicators.at(j, x);
          }
          margin = std::min(margin, std::fabs(pre));
        }
      }
    }
  }

  // |.|_1 terms kink at zero entries.
  for (const Tensor* ind : {&p.preferred_indicators, &p.rejected_indicators}) {
    const double* d = ind->data();
    for (std::size_t i = 0; i < ind->numel(); ++i) {
      margin = std::min(margin, std::fabs(d[i]));
    }
  }
  return margin;
}

ToyInstance draw_instance(uint64_t seed, Variant variant) {
  ModelDims dims;
  dims.n_users = 2;
  dims.n_items = 2;
  dims.latent_dim = 3;
  dims.preferred_aspects = 2;
  dims.rejected_aspects = 2;
  dims.n_filters = 3;
  dims.filter_width = 3;
  dims.embed_dim = 4;
  dims.attention_hidden = 3;
  dims.vocab_size = 12;

  ToyInstance inst;
  inst.params = init_params(dims, ModelKind::kRpr, variant,
                            derive_seed(seed, 0x90ad));
  Rng rng(derive_seed(seed, 0xd0c5));
  // Zero biases sit exactly on the ReLU kink; jitter them like the weights.
  for (Tensor* b : {&inst.params.conv_bias, &inst.params.preferred_head_bias,
                    &inst.params.rejected_head_bias, &inst.params.attention_bias}) {
    for (std::size_t i = 0; i < b->numel(); ++i) {
      b->data()[i] = rng.uniform(-0.3, 0.3);
    }
  }
  const int doc_len = 5;
  const int usable_vocab = dims.vocab_size - 2;  // keep oov and pad out
  inst.documents.resize(2);
  for (corpus::PolarityDocuments& docs : inst.documents) {
    for (std::vector<int>* doc : {&docs.positive, &docs.negative}) {
      for (int j = 0; j < doc_len; ++j) {
        doc->push_back(static_cast<int>(rng.uniform_int(usable_vocab)));
      }
    }
    docs.merged = docs.positive;
    docs.merged.insert(docs.merged.end(), docs.negative.begin(),
                       docs.negative.end());
  }
  for (int u = 0; u < 2; ++u) {
    for (int i = 0; i < 2; ++i) {
      inst.batch.push_back({u, i, rng.uniform(1.0, 5.0)});
    }
  }
  return inst;
}

}  // namespace

GradcheckReport certify_gradients(uint64_t seed, int trials, Variant variant) {
  if (trials < 1) throw ConfigError("gradcheck needs at least one trial");
  GradcheckReport report;
  for (int t = 0; t < trials; ++t) {
    ToyInstance inst;
    uint64_t inst_seed = 0;
    bool found = false;
    for (int attempt = 0; attempt < 200; ++attempt) {
      inst_seed = derive_seed(seed, static_cast<uint64_t>(t) * 1009 +
                                        static_cast<uint64_t>(attempt));
      inst = draw_instance(inst_seed, variant);
      if (instance_margin(inst) >= kKinkMargin) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw OracleError("no kink-free gradcheck instance after 200 draws");
    }

    ObjectiveConfig objective;
    objective.beta1 = 0.1;
    objective.beta2 = 0.1;
    objective.pad_token = inst.params.dims.vocab_size - 1;

    BatchGradients analytic =
        forward_backward(inst.params, inst.batch, inst.documents, objective);

    std::vector<int> active = inst.params.active_params();
    std::vector<Tensor*> leaves;
    leaves.reserve(active.size());
    for (int id : active) leaves.push_back(&inst.params.tensor(id));
    const auto loss = [&]() {
      return forward_backward(inst.params, inst.batch, inst.documents,
                              objective)
          .loss;
    };
    std::vector<Tensor> numeric = finite_diff_grad(loss, leaves);

    GradcheckTrial trial;
    trial.seed = inst_seed;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const Tensor& a = analytic.grads[static_cast<std::size_t>(active[k])];
      const double err = max_rel_error(a, numeric[k], kTolFloor);
      if (err > trial.max_rel_err) {
        trial.max_rel_err = err;
        trial.worst_param = param_name(active[k]);
      }
    }
    if (trial.max_rel_err > report.max_rel_err) {
      report.max_rel_err = trial.max_rel_err;
      report.worst_param = trial.worst_param;
    }
    report.trials.push_back(std::move(trial));
  }
  return report;
}

}  // namespace rpr::model
