// Copyright 2026 The bal Authors.
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

#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "bal/random.hpp"

namespace bal::cli {

using nlohmann::json;

namespace {

std::size_t line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line of the first occurrence of "key" used as an object key, or 0.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  for (std::size_t pos = text.find(quoted); pos != std::string::npos; pos = text.find(quoted, pos + 1)) {
    std::size_t after = pos + quoted.size();
    while (after < text.size() && (text[after] == ' ' || text[after] == '\t' || text[after] == '\r' || text[after] == '\n')) {
      ++after;
    }
    if (after < text.size() && text[after] == ':') return line_at(text, pos);
  }
  return 0;
}

/// nlohmann converts -1 or 2.5 to unsigned silently; reject those up front.
template <typename T>
bool fits(const json& v) {
  if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    return v.is_number_unsigned();
  } else if constexpr (std::is_same_v<T, std::vector<std::uint64_t>>) {
    return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_unsigned(); });
  } else {
    return true;
  }
}

/// Reads members of one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& obj, std::string path, const std::string& text) : obj_(obj), path_(std::move(path)), text_(text) {
    if (!obj_.is_object()) throw ConfigError("'" + path_ + "' must be an object", line_of_key(text_, leaf()));
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if (!fits<T>(*it)) throw ConfigError("'" + qualified(key) + "' must be a non-negative integer", line_of_key(text_, key));
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("wrong type for '" + qualified(key) + "'", line_of_key(text_, key));
    }
  }

  const json* child(const char* key) {
    used_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw ConfigError("unknown key '" + qualified(it.key()) + "'", line_of_key(text_, it.key()));
      }
    }
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::size_t line(const char* key) const { return line_of_key(text_, key); }

 private:
  std::string leaf() const {
    const auto dot = path_.rfind('.');
    return dot == std::string::npos ? path_ : path_.substr(dot + 1);
  }

  const json& obj_;
  std::string path_;
  const std::string& text_;
  std::set<std::string> used_;
};

template <typename T>
void require_one_of(const T& value, std::initializer_list<T> allowed, const std::string& what, std::size_t line) {
  if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
    throw ConfigError("invalid value for '" + what + "'", line);
  }
}

void require_positive(double v, const std::string& what, std::size_t line) {
  if (!(v > 0.0)) throw ConfigError("'" + what + "' must be positive", line);
}

}  // namespace

losses::WeightFunction WeightSpec::build() const {
  losses::WeightFunction w = losses::WeightFunction::constant(1.0);
  if (kind == "exp_pos") {
    w = losses::WeightFunction::exp_pos(alpha);
  } else if (kind == "exp_neg") {
    w = losses::WeightFunction::exp_neg(alpha);
  } else if (kind == "class_weights") {
    w = losses::WeightFunction::class_weights(Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  return scale == 1.0 ? w : w.scaled(scale);
}

DerivedSeeds derive_seeds(std::uint64_t seed) {
  const Rng root(seed);
  return {seed, root.split("task").key(), root.split("acquisition").key()};
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what(), line_at(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  ExperimentConfig cfg;
  Section top(doc, "", text);

  if (const json* t = top.child("task")) {
    Section s(*t, "task", text);
    auto& task = cfg.task;
    s.get("kind", task.kind);
    require_one_of<std::string>(task.kind, {"synth_1d", "csv_regression", "blobs", "csv_classification"}, "task.kind",
                                s.line("kind"));
    s.get("path", task.path);
    s.get("target", task.target);
    s.get("test_size", task.test_size);
    s.get("n_initial", task.n_initial);
    s.get("n_contexts", task.n_contexts);
    s.get("contexts", task.contexts);
    require_one_of<std::string>(task.contexts, {"separate", "test"}, "task.contexts", s.line("contexts"));
    s.get("n_classes", task.n_classes);
    s.get("per_class", task.per_class);
    s.get("dim", task.dim);
    s.get("separation", task.separation);
    if (const json* ds = s.child("data_seed"); ds && !ds->is_null()) {
      if (!ds->is_number_unsigned()) throw ConfigError("wrong type for 'task.data_seed'", s.line("data_seed"));
      task.data_seed = ds->get<std::uint64_t>();
    }
    s.get("per_class_test", task.per_class_test);
    s.get("per_class_context", task.per_class_context);
    s.get("n_initial_per_class", task.n_initial_per_class);
    s.finish();
    if ((task.kind == "csv_regression" || task.kind == "csv_classification") && (task.path.empty() || task.target.empty())) {
      throw ConfigError("csv tasks need 'task.path' and 'task.target'", s.line("kind"));
    }
  }

  if (const json* m = top.child("model")) {
    Section s(*m, "model", text);
    auto& model = cfg.model;
    s.get("kind", model.kind);
    require_one_of<std::string>(model.kind, {"gp", "forest"}, "model.kind", s.line("kind"));
    s.get("hyperparameters", model.hyperparameters);
    require_one_of<std::string>(model.hyperparameters, {"fixed", "robust"}, "model.hyperparameters",
                                s.line("hyperparameters"));
    if (const json* k = s.child("kernel")) {
      Section ks(*k, "model.kernel", text);
      ks.get("type", model.kernel.type);
      require_one_of<std::string>(model.kernel.type, {"rbf", "matern"}, "model.kernel.type", ks.line("type"));
      ks.get("lengthscale", model.kernel.lengthscale);
      ks.get("variance", model.kernel.variance);
      ks.get("nu", model.kernel.nu);
      ks.finish();
      require_positive(model.kernel.lengthscale, "model.kernel.lengthscale", ks.line("lengthscale"));
      require_positive(model.kernel.variance, "model.kernel.variance", ks.line("variance"));
    }
    s.get("mean", model.mean);
    s.get("noise_var", model.noise_var);
    require_positive(model.noise_var, "model.noise_var", s.line("noise_var"));
    s.get("nu", model.nu);
    require_one_of(model.nu, {1.5, 2.5}, "model.nu", s.line("nu"));
    require_one_of(model.kernel.nu, {1.5, 2.5}, "model.kernel.nu", s.line("nu"));
    s.get("n_trees", model.n_trees);
    if (model.n_trees == 0) throw ConfigError("'model.n_trees' must be positive", s.line("n_trees"));
    s.get("tree_threads", model.tree_threads);
    s.finish();
  }
  if (cfg.task.is_classification() != (cfg.model.kind == "forest")) {
    throw ConfigError("classification tasks need model.kind 'forest' and regression tasks 'gp'");
  }

  top.get("methods", cfg.methods);
  if (cfg.methods.empty()) throw ConfigError("'methods' must not be empty", top.line("methods"));
  for (const auto& name : cfg.methods) {
    acquisition::Method method;
    try {
      method = acquisition::method_from_string(name);
    } catch (const Error&) {
      throw ConfigError("unknown method '" + name + "'", top.line("methods"));
    }
    const bool classification_method = method == acquisition::Method::EPIG || method == acquisition::Method::EPIGw;
    if (method != acquisition::Method::Random && classification_method != cfg.task.is_classification()) {
      throw ConfigError("method '" + name + "' does not apply to task '" + cfg.task.kind + "'", top.line("methods"));
    }
  }
  if (std::set<std::string>(cfg.methods.begin(), cfg.methods.end()).size() != cfg.methods.size()) {
    throw ConfigError("duplicate entry in 'methods'", top.line("methods"));
  }

  if (const json* w = top.child("weight")) {
    Section s(*w, "weight", text);
    s.get("kind", cfg.weight.kind);
    require_one_of<std::string>(cfg.weight.kind, {"constant", "exp_pos", "exp_neg", "class_weights"}, "weight.kind",
                                s.line("kind"));
    s.get("alpha", cfg.weight.alpha);
    s.get("scale", cfg.weight.scale);
    s.get("values", cfg.weight.values);
    s.finish();
    require_positive(cfg.weight.scale, "weight.scale", s.line("scale"));
    if (cfg.weight.kind == "class_weights") {
      if (!cfg.task.is_classification()) throw ConfigError("class weights need a classification task", s.line("kind"));
      for (double v : cfg.weight.values) require_positive(v, "weight.values", s.line("values"));
    } else if (cfg.task.is_classification() && cfg.weight.kind != "constant") {
      throw ConfigError("classification tasks take 'constant' or 'class_weights' weights", s.line("kind"));
    }
  }

  top.get("linex_alpha", cfg.linex_alpha);
  require_positive(cfg.linex_alpha, "linex_alpha", top.line("linex_alpha"));

  if (const json* mc = top.child("mc")) {
    Section s(*mc, "mc", text);
    s.get("n_contexts", cfg.mc.n_contexts);
    s.get("n_y_draws", cfg.mc.n_y_draws);
    s.get("n_z_draws", cfg.mc.n_z_draws);
    s.finish();
    if (cfg.mc.n_y_draws == 0 || cfg.mc.n_z_draws == 0) throw ConfigError("'mc' draw counts must be positive");
  }

  top.get("rounds", cfg.rounds);
  top.get("seeds", cfg.seeds);
  if (cfg.seeds.empty()) throw ConfigError("'seeds' must not be empty", top.line("seeds"));
  if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size()) {
    throw ConfigError("duplicate entry in 'seeds'", top.line("seeds"));
  }
  top.get("output_dir", cfg.output_dir);
  top.get("threads", cfg.threads);

  // A lock file carries the derived seeds; they must agree with the derivation.
  if (const json* derived = top.child("derived_seeds")) {
    if (!derived->is_array() || derived->size() != cfg.seeds.size()) {
      throw ConfigError("'derived_seeds' does not match 'seeds'", top.line("derived_seeds"));
    }
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      const auto expect = derive_seeds(cfg.seeds[i]);
      const json& row = (*derived)[i];
      Section s(row, "derived_seeds", text);
      DerivedSeeds got{};
      s.get("seed", got.seed);
      s.get("task", got.task);
      s.get("acquisition", got.acquisition);
      s.finish();
      if (got.seed != expect.seed || got.task != expect.task || got.acquisition != expect.acquisition) {
        throw ConfigError("'derived_seeds' entry " + std::to_string(i) + " does not match its seed",
                          top.line("derived_seeds"));
      }
    }
  }
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json to_json(const ExperimentConfig& c) {
  json task = {{"kind", c.task.kind}};
  if (c.task.kind == "csv_regression" || c.task.kind == "csv_classification") {
    task["path"] = c.task.path;
    task["target"] = c.task.target;
  }
  if (c.task.kind == "csv_regression") {
    task["test_size"] = c.task.test_size;
    task["n_initial"] = c.task.n_initial;
    task["n_contexts"] = c.task.n_contexts;
    task["contexts"] = c.task.contexts;
  }
  if (c.task.kind == "blobs") {
    task["n_classes"] = c.task.n_classes;
    task["per_class"] = c.task.per_class;
    task["dim"] = c.task.dim;
    task["separation"] = c.task.separation;
    if (c.task.data_seed) task["data_seed"] = *c.task.data_seed;
  }
  if (c.task.is_classification()) {
    task["per_class_test"] = c.task.per_class_test;
    task["per_class_context"] = c.task.per_class_context;
    task["n_initial_per_class"] = c.task.n_initial_per_class;
  }

  json model = {{"kind", c.model.kind}};
  if (c.model.kind == "gp") {
    model["hyperparameters"] = c.model.hyperparameters;
    model["kernel"] = {{"type", c.model.kernel.type},
                       {"lengthscale", c.model.kernel.lengthscale},
                       {"variance", c.model.kernel.variance},
                       {"nu", c.model.kernel.nu}};
    model["mean"] = c.model.mean;
    model["noise_var"] = c.model.noise_var;
    model["nu"] = c.model.nu;
  } else {
    model["n_trees"] = c.model.n_trees;
    model["tree_threads"] = c.model.tree_threads;
  }

  json weight = {{"kind", c.weight.kind}, {"alpha", c.weight.alpha}, {"scale", c.weight.scale}};
  if (c.weight.kind == "class_weights") weight["values"] = c.weight.values;

  json derived = json::array();
  for (auto s : c.seeds) {
    const auto d = derive_seeds(s);
    derived.push_back({{"seed", d.seed}, {"task", d.task}, {"acquisition", d.acquisition}});
  }
  return {{"task", task},
          {"model", model},
          {"methods", c.methods},
          {"weight", weight},
          {"linex_alpha", c.linex_alpha},
          {"mc", {{"n_contexts", c.mc.n_contexts}, {"n_y_draws", c.mc.n_y_draws}, {"n_z_draws", c.mc.n_z_draws}}},
          {"rounds", c.rounds},
          {"seeds", c.seeds},
          {"output_dir", c.output_dir},
          {"threads", c.threads},
          {"derived_seeds", derived}};
}

}  // namespace bal::cli
