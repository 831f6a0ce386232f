// Copyright 2026 The ReverB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "reverb/run_config.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "reverb/errors.h"

namespace reverb {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view value, std::string_view key, std::size_t at) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError("invalid value '" + std::string(value) + "' for key '" +
                         std::string(key) + "'",
                     at);
  }
  return out;
}

}  // namespace

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = batch;
  c.lr0 = lr0;
  c.momentum = momentum;
  c.seed = seed;
  return c;
}

NetworkOptions RunConfig::network_options() const {
  NetworkOptions o;
  o.mode = mode;
  o.tau = tau;
  o.v_th = v_th;
  o.timesteps = timesteps;
  o.seed = seed;
  o.affine = affine;
  return o;
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "dataset = " << dataset << "\n"
      << "arch = " << arch << "\n"
      << "T = " << timesteps << "\n"
      << "tau = " << tau << "\n"
      << "v_th = " << v_th << "\n"
      << "mode = " << train_mode_name(mode) << "\n"
      << "epochs = " << epochs << "\n"
      << "batch = " << batch << "\n"
      << "lr0 = " << lr0 << "\n"
      << "momentum = " << momentum << "\n"
      << "seed = " << seed << "\n"
      << "affine = " << (affine ? "true" : "false") << "\n";
  return out.str();
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig c;
  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError("expected key = value", pos);
      }
      const std::string_view key = trim(line.substr(0, eq));
      const std::string_view value = trim(line.substr(eq + 1));
      if (value.empty()) {
        throw ParseError("missing value for key '" + std::string(key) + "'", pos);
      }
      if (!seen.insert(std::string(key)).second) {
        throw ParseError("duplicate key '" + std::string(key) + "'", pos);
      }
      if (key == "dataset") {
        c.dataset = value;
      } else if (key == "arch") {
        if (value != "mlp-small" && value != "convnet-small") {
          throw ParseError("unknown architecture '" + std::string(value) + "'", pos);
        }
        c.arch = value;
      } else if (key == "T") {
        c.timesteps = parse_number<std::size_t>(value, key, pos);
      } else if (key == "tau") {
        c.tau = parse_number<double>(value, key, pos);
      } else if (key == "v_th") {
        c.v_th = parse_number<double>(value, key, pos);
      } else if (key == "mode") {
        try {
          c.mode = parse_train_mode(value);
        } catch (const Error&) {
          throw ParseError("unknown mode '" + std::string(value) + "'", pos);
        }
      } else if (key == "epochs") {
        c.epochs = parse_number<int>(value, key, pos);
      } else if (key == "batch") {
        c.batch = parse_number<std::size_t>(value, key, pos);
      } else if (key == "lr0") {
        c.lr0 = parse_number<double>(value, key, pos);
      } else if (key == "momentum") {
        c.momentum = parse_number<double>(value, key, pos);
      } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(value, key, pos);
      } else if (key == "affine") {
        if (value == "true" || value == "1") {
          c.affine = true;
        } else if (value == "false" || value == "0") {
          c.affine = false;
        } else {
          throw ParseError("affine must be true or false", pos);
        }
      } else {
        throw ParseError("unknown key '" + std::string(key) + "'", pos);
      }
    }
    pos = end + 1;
  }
  if (c.timesteps == 0) throw ParseError("T must be positive");
  if (c.epochs < 0) throw ParseError("epochs must be non-negative");
  if (c.batch == 0) throw ParseError("batch must be positive");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

}  // namespace reverb
