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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "rpr/common.hpp"
#include "rpr/train/train.hpp"

namespace rpr::train {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  long v = std::strtol(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    throw ConfigError("config key '" + key + "': expected an integer, got '" +
                      value + "'");
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0' ||
      value.find('-') != std::string::npos) {
    throw ConfigError("config key '" + key +
                      "': expected a non-negative integer, got '" + value +
                      "'");
  }
  return static_cast<std::uint64_t>(v);
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    throw ConfigError("config key '" + key + "': expected a number, got '" +
                      value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" +
                    value + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void apply_config_entry(TrainConfig& c, const std::string& key,
                        const std::string& value) {
  if (key == "latent_dim") {
    c.latent_dim = parse_int(key, value);
  } else if (key == "preferred_aspects") {
    c.preferred_aspects = parse_int(key, value);
  } else if (key == "rejected_aspects") {
    c.rejected_aspects = parse_int(key, value);
  } else if (key == "n_filters") {
    c.n_filters = parse_int(key, value);
  } else if (key == "filter_width") {
    c.filter_width = parse_int(key, value);
  } else if (key == "attention_hidden") {
    c.attention_hidden = parse_int(key, value);
  } else if (key == "learning_rate") {
    c.learning_rate = parse_double(key, value);
  } else if (key == "batch_size") {
    c.batch_size = parse_int(key, value);
  } else if (key == "max_epochs") {
    c.max_epochs = parse_int(key, value);
  } else if (key == "patience") {
    c.patience = parse_int(key, value);
  } else if (key == "dropout") {
    c.dropout = parse_double(key, value);
  } else if (key == "clip_norm") {
    c.clip_norm = parse_double(key, value);
  } else if (key == "beta1") {
    c.beta1 = parse_double(key, value);
  } else if (key == "beta2") {
    c.beta2 = parse_double(key, value);
  } else if (key == "adam_beta1") {
    c.adam_beta1 = parse_double(key, value);
  } else if (key == "adam_beta2") {
    c.adam_beta2 = parse_double(key, value);
  } else if (key == "adam_epsilon") {
    c.adam_epsilon = parse_double(key, value);
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else if (key == "model") {
    c.model = model::parse_model_kind(value);
  } else if (key == "variant") {
    c.variant = model::parse_variant(value);
  } else if (key == "epoch_schedule") {
    c.epoch_schedule = parse_bool(key, value);
  } else if (key == "freeze_embeddings") {
    c.freeze_embeddings = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

TrainConfig parse_config_text(const std::string& text,
                              const std::string& origin, TrainConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected key = value, got '" + t + "'");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": empty key");
    }
    try {
      apply_config_entry(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return base;
}

TrainConfig parse_config_file(const std::string& path, TrainConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path, base);
}

std::map<std::string, std::string> config_entries(const TrainConfig& c) {
  std::map<std::string, std::string> out;
  out["latent_dim"] = std::to_string(c.latent_dim);
  out["preferred_aspects"] = std::to_string(c.preferred_aspects);
  out["rejected_aspects"] = std::to_string(c.rejected_aspects);
  out["n_filters"] = std::to_string(c.n_filters);
  out["filter_width"] = std::to_string(c.filter_width);
  out["attention_hidden"] = std::to_string(c.attention_hidden);
  out["learning_rate"] = format_double(c.learning_rate);
  out["batch_size"] = std::to_string(c.batch_size);
  out["max_epochs"] = std::to_string(c.max_epochs);
  out["patience"] = std::to_string(c.patience);
  out["dropout"] = format_double(c.dropout);
  out["clip_norm"] = format_double(c.clip_norm);
  out["beta1"] = format_double(c.beta1);
  out["beta2"] = format_double(c.beta2);
  out["adam_beta1"] = format_double(c.adam_beta1);
  out["adam_beta2"] = format_double(c.adam_beta2);
  out["adam_epsilon"] = format_double(c.adam_epsilon);
  out["seed"] = std::to_string(c.seed);
  out["model"] = model::model_kind_name(c.model);
  out["variant"] = model::variant_name(c.variant);
  out["epoch_schedule"] = c.epoch_schedule ? "true" : "false";
  out["freeze_embeddings"] = c.freeze_embeddings ? "true" : "false";
  return out;
}

void validate(const TrainConfig& c) {
  if (c.latent_dim < 1) throw ConfigError("latent_dim must be positive");
  if (c.model == model::ModelKind::kRpr) {
    if (c.preferred_aspects < 1 || c.rejected_aspects < 1) {
      throw ConfigError("aspect counts must be positive");
    }
    if (c.n_filters < 1) throw ConfigError("n_filters must be positive");
    if (c.filter_width < 1 || c.filter_width % 2 == 0) {
      throw ConfigError("filter_width must be a positive odd number");
    }
    if (c.attention_hidden < 1) {
      throw ConfigError("attention_hidden must be positive");
    }
  }
  if (c.learning_rate < 0) throw ConfigError("learning_rate must be >= 0");
  if (c.batch_size < 1) throw ConfigError("batch_size must be positive");
  if (c.max_epochs < 1) throw ConfigError("max_epochs must be positive");
  if (c.patience < 1) throw ConfigError("patience must be positive");
  if (c.dropout < 0 || c.dropout >= 1) {
    throw ConfigError("dropout must lie in [0, 1)");
  }
  if (c.beta1 < 0 || c.beta2 < 0) {
    throw ConfigError("regularization weights must be >= 0");
  }
  if (c.adam_beta1 < 0 || c.adam_beta1 >= 1 || c.adam_beta2 < 0 ||
      c.adam_beta2 >= 1) {
    throw ConfigError("adam decay rates must lie in [0, 1)");
  }
  if (c.adam_epsilon <= 0) throw ConfigError("adam_epsilon must be positive");
}

}  // namespace rpr::train
