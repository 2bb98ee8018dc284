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
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "rpr/common.hpp"
#include "rpr/corpus/corpus.hpp"

namespace rpr::corpus {

namespace {

constexpr double kAmplitude = 1.8;
constexpr double kFillerShare = 0.15;
constexpr int kFillerWords = 8;

std::string padded(const char* prefix, int a, int b) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%dw%02d", prefix, a, b);
  return buf;
}

// Uniform simplex point via normalized exponentials.
std::vector<double> simplex_point(Rng& rng, int n) {
  std::vector<double> v(static_cast<size_t>(n));
  double z = 0.0;
  for (auto& x : v) {
    double u = rng.uniform();
    while (u <= 1e-300) u = rng.uniform();
    x = -std::log(u);
    z += x;
  }
  for (auto& x : v) x /= z;
  return v;
}

double planted_rating(const SyntheticTruth& truth, int u, int i, double noise, Rng& rng) {
  const auto& rp = truth.user_preferred[static_cast<size_t>(u)];
  const auto& rr = truth.user_rejected[static_cast<size_t>(u)];
  const auto& sp = truth.item_preferred[static_cast<size_t>(i)];
  const auto& sr = truth.item_rejected[static_cast<size_t>(i)];
  double score = 0.0;
  for (size_t a = 0; a < rp.size(); ++a) score += rp[a] * sp[a];
  for (size_t a = 0; a < rr.size(); ++a) score -= rr[a] * sr[a];
  double r = 3.0 + truth.amplitude * score;
  if (noise > 0.0) r += noise * rng.normal();
  return std::min(5.0, std::max(1.0, r));
}

int pick_aspect(Rng& rng, const std::vector<double>& weights) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t a = 0; a < weights.size(); ++a) {
    acc += weights[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(weights.size()) - 1;
}

}  // namespace

std::pair<std::vector<InteractionRecord>, SyntheticTruth> generate_synthetic(
    const SyntheticConfig& cfg) {
  if (cfg.n_users <= 0 || cfg.n_items <= 0)
    throw ConfigError("generate_synthetic: user and item counts must be positive");
  if (cfg.n_preferred <= 0 || cfg.n_rejected <= 0)
    throw ConfigError("generate_synthetic: aspect counts must be positive");
  if (cfg.imbalance_ratio <= 0.0 || cfg.imbalance_ratio >= 1.0)
    throw ConfigError("generate_synthetic: imbalance ratio must lie strictly between 0 and 1");
  if (cfg.noise < 0.0) throw ConfigError("generate_synthetic: noise must be non-negative");
  if (cfg.reviews_per_user <= 0 || cfg.words_per_review <= 0 || cfg.pool_size <= 0)
    throw ConfigError("generate_synthetic: review shape knobs must be positive");
  if (cfg.n_items < cfg.reviews_per_user)
    throw ConfigError("generate_synthetic: need at least reviews_per_user items");
  if (cfg.rejected_mix < 0.0 || cfg.rejected_mix > 1.0)
    throw ConfigError("generate_synthetic: rejected_mix must lie in [0, 1]");
  if (cfg.shared_pools && cfg.n_preferred != cfg.n_rejected)
    throw ConfigError("generate_synthetic: shared pools need matching aspect counts");

  SyntheticTruth truth;
  truth.amplitude = kAmplitude;
  if (cfg.shared_pools) {
    for (int x = 0; x < cfg.n_preferred; ++x) {
      std::vector<std::string> pool;
      for (int k = 0; k < cfg.pool_size; ++k) pool.push_back(padded("a", x, k));
      truth.preferred_pools.push_back(std::move(pool));
    }
    truth.rejected_pools = truth.preferred_pools;
  } else {
    for (int x = 0; x < cfg.n_preferred; ++x) {
      std::vector<std::string> pool;
      for (int k = 0; k < cfg.pool_size; ++k) pool.push_back(padded("p", x, k));
      truth.preferred_pools.push_back(std::move(pool));
    }
    for (int y = 0; y < cfg.n_rejected; ++y) {
      std::vector<std::string> pool;
      for (int k = 0; k < cfg.pool_size; ++k) pool.push_back(padded("r", y, k));
      truth.rejected_pools.push_back(std::move(pool));
    }
  }
  std::vector<std::string> filler;
  for (int k = 0; k < kFillerWords; ++k) filler.push_back(padded("f", 0, k));

  Rng rng(derive_seed(cfg.seed, 0x5e11));

  for (int u = 0; u < cfg.n_users; ++u) {
    if (cfg.uniform_importance) {
      truth.user_preferred.emplace_back(cfg.n_preferred, 1.0 / cfg.n_preferred);
      truth.user_rejected.emplace_back(cfg.n_rejected, 1.0 / cfg.n_rejected);
      continue;
    }
    auto rp = simplex_point(rng, cfg.n_preferred);
    // With matching aspect counts the rejected-side importance leans on the
    // preferred side: the cross-polarity consistency the offset exploits.
    // rejected_mix sets how hard it leans.
    std::vector<double> rr;
    if (cfg.n_preferred == cfg.n_rejected && cfg.rejected_mix >= 1.0) {
      rr = rp;  // no draw, so the stream matches the pure-mirror case
    } else if (cfg.n_preferred == cfg.n_rejected) {
      rr = simplex_point(rng, cfg.n_rejected);
      double z = 0.0;
      for (size_t a = 0; a < rr.size(); ++a) {
        rr[a] = cfg.rejected_mix * rp[a] + (1.0 - cfg.rejected_mix) * rr[a];
        z += rr[a];
      }
      for (auto& v : rr) v /= z;
    } else {
      rr = simplex_point(rng, cfg.n_rejected);
    }
    truth.user_preferred.push_back(std::move(rp));
    truth.user_rejected.push_back(std::move(rr));
  }
  for (int i = 0; i < cfg.n_items; ++i) {
    std::vector<double> sp(static_cast<size_t>(cfg.n_preferred));
    std::vector<double> sr(static_cast<size_t>(cfg.n_rejected));
    for (auto& v : sp) v = rng.uniform();
    for (auto& v : sr) v = rng.uniform();
    truth.item_preferred.push_back(std::move(sp));
    truth.item_rejected.push_back(std::move(sr));
  }

  std::vector<InteractionRecord> records;
  records.reserve(static_cast<size_t>(cfg.n_users) * cfg.reviews_per_user);
  char idbuf[24];
  for (int u = 0; u < cfg.n_users; ++u) {
    const int n_rev = cfg.reviews_per_user;
    int n_pos = static_cast<int>(std::lround(cfg.imbalance_ratio * n_rev));
    n_pos = std::max(0, std::min(n_rev, n_pos));
    std::vector<uint8_t> want_positive(static_cast<size_t>(n_rev), 0);
    for (int k = 0; k < n_pos; ++k) want_positive[static_cast<size_t>(k)] = 1;
    rng.shuffle(want_positive);

    std::vector<uint8_t> used(static_cast<size_t>(cfg.n_items), 0);
    for (int k = 0; k < n_rev; ++k) {
      const bool positive = want_positive[static_cast<size_t>(k)] != 0;
      int item = -1;
      double rating = 0.0;
      for (int attempt = 0; attempt < 64 * cfg.n_items && item < 0; ++attempt) {
        const int cand = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(cfg.n_items)));
        if (used[static_cast<size_t>(cand)]) continue;
        const double r = planted_rating(truth, u, cand, cfg.noise, rng);
        if ((r >= 3.0) == positive) {
          item = cand;
          rating = r;
        }
      }
      if (item < 0)
        throw ConfigError("generate_synthetic: cannot realize the requested imbalance; "
                          "increase n_items or relax imbalance_ratio");
      used[static_cast<size_t>(item)] = 1;

      const auto& weights = positive ? truth.user_preferred[static_cast<size_t>(u)]
                                     : truth.user_rejected[static_cast<size_t>(u)];
      const auto& pools = positive ? truth.preferred_pools : truth.rejected_pools;
      std::string review;
      for (int w = 0; w < cfg.words_per_review; ++w) {
        if (!review.empty()) review.push_back(' ');
        if (rng.uniform() < kFillerShare) {
          review += filler[static_cast<size_t>(rng.uniform_int(filler.size()))];
        } else {
          const int a = pick_aspect(rng, weights);
          const auto& pool = pools[static_cast<size_t>(a)];
          review += pool[static_cast<size_t>(rng.uniform_int(pool.size()))];
        }
      }

      InteractionRecord rec;
      std::snprintf(idbuf, sizeof(idbuf), "u%04d", u);
      rec.user_id = idbuf;
      std::snprintf(idbuf, sizeof(idbuf), "i%04d", item);
      rec.item_id = idbuf;
      rec.rating = rating;
      rec.review = std::move(review);
      records.push_back(std::move(rec));
    }
  }
  return {std::move(records), std::move(truth)};
}

}  // namespace rpr::corpus
