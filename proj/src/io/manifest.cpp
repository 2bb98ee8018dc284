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
#include <ctime>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rpr/common.hpp"
#include "rpr/io/io.hpp"

namespace rpr::io {
namespace {

namespace fs = std::filesystem;

std::string utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for digesting");
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    if (in.eof()) break;
  }
  return h;
}

void write_run_manifest(const RunManifest& manifest, const std::string& dir) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw DataError("cannot create directory '" + dir + "'");

  nlohmann::json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config;
  j["seed"] = manifest.seed;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [path, digest] : manifest.input_digests) {
    char hex[19];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(digest));
    inputs[path] = hex;
  }
  j["inputs"] = inputs;
  j["tool_version"] = manifest.tool_version;
  j["created_utc"] =
      manifest.created_utc.empty() ? utc_now() : manifest.created_utc;

  const fs::path tmp = root / "manifest.json.tmp";
  const fs::path final_path = root / "manifest.json";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << j.dump(2) << "\n";
    if (!out.flush()) throw DataError("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, final_path, ec);
  if (ec) throw DataError("cannot finalize '" + final_path.string() + "'");
}

}  // namespace rpr::io
