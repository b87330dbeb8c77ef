/* Copyright 2026 The locopipe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "locopipe/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "locopipe/error.hpp"

namespace locopipe {

std::string_view DatasetKindName(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kBlobs: return "blobs";
    case DatasetKind::kSpirals: return "spirals";
    case DatasetKind::kIdx: return "idx";
  }
  return "?";
}

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> SplitList(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(Trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

[[noreturn]] void Invalid(std::string_view key, std::string_view value,
                          int line, const char* why) {
  throw Error(ErrorCode::kInvalidValue,
              "line " + std::to_string(line) + ": " + std::string(key) +
                  " = '" + std::string(value) + "': " + why);
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value, int line) {
  T out{};
  const char* begin = value.data();
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    Invalid(key, value, line, "not a number");
  }
  return out;
}

std::size_t ParsePositive(std::string_view key, std::string_view value,
                          int line) {
  const auto v = ParseNumber<std::size_t>(key, value, line);
  if (v < 1) Invalid(key, value, line, "must be >= 1");
  return v;
}

double ParseNonNegative(std::string_view key, std::string_view value,
                        int line) {
  const double v = ParseNumber<double>(key, value, line);
  if (!(v >= 0.0)) Invalid(key, value, line, "must be >= 0");
  return v;
}

std::vector<double> ParseDoubleList(std::string_view key,
                                    std::string_view value, int line) {
  std::vector<double> out;
  for (auto item : SplitList(value)) {
    out.push_back(ParseNonNegative(key, item, line));
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view value, int line) {
  if (value == "true") return true;
  if (value == "false") return false;
  Invalid(key, value, line, "expected true or false");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, int)>;

const std::map<std::string, Setter, std::less<>>& Setters() {
  static const auto* setters = new std::map<std::string, Setter, std::less<>>{
      {"dataset",
       [](ExperimentConfig& c, std::string_view v, int line) {
         if (v == "blobs") c.dataset.kind = DatasetKind::kBlobs;
         else if (v == "spirals") c.dataset.kind = DatasetKind::kSpirals;
         else if (v == "idx") c.dataset.kind = DatasetKind::kIdx;
         else Invalid("dataset", v, line, "expected blobs, spirals or idx");
       }},
      {"n_per_class",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.dataset.n_per_class = ParsePositive("n_per_class", v, line);
       }},
      {"test_n_per_class",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.dataset.test_n_per_class = ParsePositive("test_n_per_class", v, line);
       }},
      {"classes",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.dataset.classes = static_cast<int>(ParsePositive("classes", v, line));
       }},
      {"dim",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.dataset.dim = ParsePositive("dim", v, line);
       }},
      {"spread",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.dataset.spread = ParseNonNegative("spread", v, line);
       }},
      {"noise",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.dataset.noise = ParseNonNegative("noise", v, line);
       }},
      {"train_images",
       [](ExperimentConfig& c, std::string_view v, int) {
         c.dataset.train_images = std::string(v);
       }},
      {"train_labels",
       [](ExperimentConfig& c, std::string_view v, int) {
         c.dataset.train_labels = std::string(v);
       }},
      {"test_images",
       [](ExperimentConfig& c, std::string_view v, int) {
         c.dataset.test_images = std::string(v);
       }},
      {"test_labels",
       [](ExperimentConfig& c, std::string_view v, int) {
         c.dataset.test_labels = std::string(v);
       }},
      {"layer_dims",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.layer_dims.clear();
         for (auto item : SplitList(v)) {
           c.layer_dims.push_back(ParsePositive("layer_dims", item, line));
         }
         if (c.layer_dims.size() < 2) {
           Invalid("layer_dims", v, line, "needs at least two widths");
         }
       }},
      {"stages",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.stages = ParsePositive("stages", v, line);
       }},
      {"buffer_capacity",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.buffer_capacity = ParsePositive("buffer_capacity", v, line);
       }},
      {"aux_max_depth",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.aux_max_depth =
             static_cast<int>(ParsePositive("aux_max_depth", v, line));
       }},
      {"aux_period",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.aux_period = static_cast<int>(ParsePositive("aux_period", v, line));
       }},
      {"aux_hidden_width",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.aux_hidden_width =
             ParseNumber<std::size_t>("aux_hidden_width", v, line);
       }},
      {"batch_size",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.batch_size = ParsePositive("batch_size", v, line);
       }},
      {"epochs",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.epochs = ParsePositive("epochs", v, line);
       }},
      {"lr0",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.lr0 = ParseNonNegative("lr0", v, line);
       }},
      {"lr_min",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.lr_min = ParseNonNegative("lr_min", v, line);
       }},
      {"momentum",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.momentum = ParseNonNegative("momentum", v, line);
         if (c.momentum >= 1.0) Invalid("momentum", v, line, "must be < 1");
       }},
      {"weight_decay",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.weight_decay = ParseNonNegative("weight_decay", v, line);
       }},
      {"seed",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.seed = ParseNumber<std::uint64_t>("seed", v, line);
       }},
      {"modes",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.modes.clear();
         for (auto item : SplitList(v)) {
           const auto mode = ParseRunMode(item);
           if (!mode) Invalid("modes", item, line, "expected E2E, NaivePP or PPLL");
           if (std::find(c.modes.begin(), c.modes.end(), *mode) != c.modes.end()) {
             Invalid("modes", item, line, "listed twice");
           }
           c.modes.push_back(*mode);
         }
       }},
      {"shuffle",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.shuffle = ParseBool("shuffle", v, line);
       }},
      {"deterministic",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.deterministic = ParseBool("deterministic", v, line);
       }},
      {"sleep_forward",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.sleep_forward = ParseDoubleList("sleep_forward", v, line);
       }},
      {"sleep_backward",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.sleep_backward = ParseDoubleList("sleep_backward", v, line);
       }},
      {"sleep_update",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.sleep_update = ParseDoubleList("sleep_update", v, line);
       }},
      {"sleep_comm",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.sleep_comm = ParseNonNegative("sleep_comm", v, line);
       }},
      {"profile_f",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.profile_f = ParseDoubleList("profile_f", v, line);
       }},
      {"profile_b",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.profile_b = ParseDoubleList("profile_b", v, line);
       }},
      {"profile_u",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.profile_u = ParseDoubleList("profile_u", v, line);
       }},
      {"profile_f_a",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.profile_f_a = ParseDoubleList("profile_f_a", v, line);
       }},
      {"profile_b_a",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.profile_b_a = ParseDoubleList("profile_b_a", v, line);
       }},
      {"profile_u_a",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.profile_u_a = ParseDoubleList("profile_u_a", v, line);
       }},
      {"profile_q",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.profile_q = ParseNonNegative("profile_q", v, line);
       }},
      {"sim_batches",
       [](ExperimentConfig& c, std::string_view v, int line) {
         c.sim_batches = ParsePositive("sim_batches", v, line);
       }},
  };
  return *setters;
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T, typename F>
std::string JoinList(const std::vector<T>& items, F&& format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += format(items[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig ParseConfigText(std::string_view text) {
  ExperimentConfig cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = Trim(line.substr(0, eq));
    const std::string_view value = Trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": missing key");
    }
    const auto& setters = Setters();
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(ErrorCode::kUnknownKey,
                  "line " + std::to_string(line_no) + ": " + std::string(key));
    }
    if (!seen.insert(std::string(key)).second) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) +
                                              ": duplicate key " +
                                              std::string(key));
    }
    it->second(cfg, value, line_no);
  }
  return cfg;
}

ExperimentConfig ParseConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseConfigText(buf.str());
}

std::string SerializeConfig(const ExperimentConfig& c) {
  auto num = [](auto v) { return std::to_string(v); };
  std::ostringstream os;
  os << "dataset = " << DatasetKindName(c.dataset.kind) << '\n'
     << "n_per_class = " << c.dataset.n_per_class << '\n'
     << "test_n_per_class = " << c.dataset.test_n_per_class << '\n'
     << "classes = " << c.dataset.classes << '\n'
     << "dim = " << c.dataset.dim << '\n'
     << "spread = " << FormatDouble(c.dataset.spread) << '\n'
     << "noise = " << FormatDouble(c.dataset.noise) << '\n';
  if (!c.dataset.train_images.empty())
    os << "train_images = " << c.dataset.train_images << '\n';
  if (!c.dataset.train_labels.empty())
    os << "train_labels = " << c.dataset.train_labels << '\n';
  if (!c.dataset.test_images.empty())
    os << "test_images = " << c.dataset.test_images << '\n';
  if (!c.dataset.test_labels.empty())
    os << "test_labels = " << c.dataset.test_labels << '\n';
  if (!c.layer_dims.empty())
    os << "layer_dims = " << JoinList(c.layer_dims, num) << '\n';
  os << "stages = " << c.stages << '\n'
     << "buffer_capacity = " << c.buffer_capacity << '\n'
     << "aux_max_depth = " << c.aux_max_depth << '\n'
     << "aux_period = " << c.aux_period << '\n'
     << "aux_hidden_width = " << c.aux_hidden_width << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "epochs = " << c.epochs << '\n'
     << "lr0 = " << FormatDouble(c.lr0) << '\n'
     << "lr_min = " << FormatDouble(c.lr_min) << '\n'
     << "momentum = " << FormatDouble(c.momentum) << '\n'
     << "weight_decay = " << FormatDouble(c.weight_decay) << '\n'
     << "seed = " << c.seed << '\n';
  if (!c.modes.empty())
    os << "modes = "
       << JoinList(c.modes, [](RunMode m) { return std::string(RunModeName(m)); })
       << '\n';
  os << "shuffle = " << (c.shuffle ? "true" : "false") << '\n'
     << "deterministic = " << (c.deterministic ? "true" : "false") << '\n';
  auto list = [&](const char* key, const std::vector<double>& v) {
    if (!v.empty()) os << key << " = " << JoinList(v, FormatDouble) << '\n';
  };
  list("sleep_forward", c.sleep_forward);
  list("sleep_backward", c.sleep_backward);
  list("sleep_update", c.sleep_update);
  os << "sleep_comm = " << FormatDouble(c.sleep_comm) << '\n';
  list("profile_f", c.profile_f);
  list("profile_b", c.profile_b);
  list("profile_u", c.profile_u);
  list("profile_f_a", c.profile_f_a);
  list("profile_b_a", c.profile_b_a);
  list("profile_u_a", c.profile_u_a);
  os << "profile_q = " << FormatDouble(c.profile_q) << '\n'
     << "sim_batches = " << c.sim_batches << '\n';
  return os.str();
}

}  // namespace locopipe
