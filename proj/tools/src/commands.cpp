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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "bal/datasets.hpp"
#include "bal/loop.hpp"

namespace bal::cli {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ExperimentError::ExperimentError(std::uint64_t seed, std::string method, std::size_t round, const std::string& what)
    : Error("seed " + std::to_string(seed) + ", method " + method + ", round " + std::to_string(round) + ": " + what),
      seed_(seed),
      method_(std::move(method)),
      round_(round) {}

namespace {

struct Job {
  std::size_t seed_index;
  std::size_t method_index;
};

struct JobOutput {
  std::vector<ResultRow> rows;
  bool truncated = false;
  std::size_t clamped = 0;
  std::optional<ExperimentError> error;
};

datasets::RegressionTask build_regression_task(const TaskSpec& t, std::uint64_t seed) {
  if (t.kind == "synth_1d") return datasets::synth_1d(seed);
  datasets::CsvRegressionOptions o;
  o.target = t.target;
  o.test_size = t.test_size;
  o.n_initial = t.n_initial;
  o.n_contexts = t.n_contexts;
  o.contexts = t.contexts == "test" ? datasets::ContextSource::Test : datasets::ContextSource::Separate;
  return datasets::load_csv_regression(t.path, o, seed);
}

datasets::ClassificationTask build_classification_task(const ExperimentConfig& cfg, std::uint64_t seed) {
  const TaskSpec& t = cfg.task;
  datasets::StratifyOptions split;
  split.per_class_test = t.per_class_test;
  split.per_class_context = t.per_class_context;
  split.n_initial_per_class = t.n_initial_per_class;
  if (cfg.weight.kind == "class_weights") {
    split.class_weights = Eigen::Map<const Vec>(cfg.weight.values.data(), static_cast<Eigen::Index>(cfg.weight.values.size()));
    split.class_weights *= cfg.weight.scale;
  }
  datasets::ClassificationTask task;
  if (t.kind == "blobs") {
    datasets::BlobOptions o;
    o.n_classes = t.n_classes;
    o.per_class = t.per_class;
    o.dim = t.dim;
    o.separation = t.separation;
    o.data_seed = t.data_seed;
    o.split = split;
    task = datasets::synth_blobs(o, seed);
  } else {
    datasets::CsvClassificationOptions o;
    static_cast<datasets::StratifyOptions&>(o) = split;
    o.target = t.target;
    task = datasets::load_csv_classification(t.path, o, seed);
  }
  if (cfg.weight.kind == "constant") task.class_weights = Vec::Constant(task.n_classes, cfg.weight.scale);
  return task;
}

loop::RegressionModelConfig regression_model(const ModelSpec& m) {
  loop::RegressionModelConfig out;
  out.mode = m.hyperparameters == "robust" ? loop::RegressionModelConfig::Hyperparameters::Robust
                                           : loop::RegressionModelConfig::Hyperparameters::Fixed;
  out.kernel = m.kernel.type == "rbf" ? gp::Kernel::rbf(m.kernel.lengthscale, m.kernel.variance)
                                      : gp::Kernel::matern(m.kernel.nu, m.kernel.lengthscale, m.kernel.variance);
  out.mean_const = m.mean;
  out.noise_var = m.noise_var;
  out.nu = m.nu;
  return out;
}

void append_rows(JobOutput& out, std::uint64_t seed, const std::vector<loop::RoundRecord>& records) {
  for (const auto& rec : records) {
    for (const auto& metric : rec.metrics) {
      if (!std::isfinite(metric.value)) {
        throw ExperimentError(seed, rec.method, rec.round, "metric " + metric.name + " is not finite");
      }
      out.rows.push_back({seed, rec.method, rec.round, metric.name, metric.value});
    }
    out.clamped += rec.nll_clamped;
    out.truncated = out.truncated || rec.truncated;
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  // Tasks are built once per seed and shared by every method.
  std::vector<datasets::RegressionTask> reg_tasks;
  std::vector<datasets::ClassificationTask> cls_tasks;
  for (auto seed : cfg.seeds) {
    const auto derived = derive_seeds(seed);
    try {
      if (cfg.task.is_classification()) {
        cls_tasks.push_back(build_classification_task(cfg, derived.task));
        if (cls_tasks.back().class_weights.size() != cls_tasks.back().n_classes) {
          throw ConfigError("'weight.values' needs one entry per class (" + std::to_string(cls_tasks.back().n_classes) +
                            ")");
        }
      } else {
        reg_tasks.push_back(build_regression_task(cfg.task, derived.task));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("cannot build task for seed " + std::to_string(seed) + ": " + e.what());
    }
  }

  std::vector<Job> jobs;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) jobs.push_back({s, m});
  }
  std::vector<JobOutput> outputs(jobs.size());

  auto run_job = [&](std::size_t j) {
    const auto [s, m] = jobs[j];
    const std::uint64_t seed = cfg.seeds[s];
    const std::string& method = cfg.methods[m];
    JobOutput& out = outputs[j];
    acquisition::AcquisitionConfig acq;
    acq.method = acquisition::method_from_string(method);
    acq.weight = cfg.weight.build();
    acq.n_contexts = cfg.mc.n_contexts;
    acq.n_y_draws = cfg.mc.n_y_draws;
    acq.n_z_draws = cfg.mc.n_z_draws;
    acq.seed = derive_seeds(seed).acquisition;
    acq.linex_alpha = cfg.linex_alpha;
    try {
      if (cfg.task.is_classification()) {
        loop::EnsembleConfig model{cfg.model.n_trees, cfg.model.tree_threads};
        append_rows(out, seed, loop::run_classification(cls_tasks[s], model, acq, cfg.rounds));
      } else {
        loop::EvaluationConfig eval{cfg.weight.build(), cfg.linex_alpha};
        append_rows(out, seed, loop::run_regression(reg_tasks[s], regression_model(cfg.model), acq, eval, cfg.rounds));
      }
    } catch (const ExperimentError& e) {
      out.error = e;
    } catch (const loop::RunError& e) {
      out.error = ExperimentError(seed, method, e.round(), e.what());
    } catch (const std::exception& e) {
      out.error = ExperimentError(seed, method, 0, e.what());
    }
  };

  const unsigned n_threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(jobs.size())));
  if (n_threads == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < n_threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) run_job(j);
      });
    }
    for (auto& w : workers) w.join();
  }

  ExperimentResult result;
  for (auto& out : outputs) {
    if (out.error) throw *out.error;
    result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
    result.truncated_runs += out.truncated ? 1 : 0;
    result.nll_clamped += out.clamped;
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.seed, a.method, a.round) < std::tie(b.seed, b.method, b.round);
  });
  return result;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "results.csv", std::ios::binary);
    csv << "seed,method,round,metric,value\n";
    for (const auto& r : result.rows) {
      csv << r.seed << ',' << r.method << ',' << r.round << ',' << r.metric << ',' << format_double(r.value) << '\n';
    }
    if (!csv) throw Error("cannot write " + (dir / "results.csv").string());
  }
  {
    std::ofstream lock(dir / "config.lock", std::ios::binary);
    lock << to_json(cfg).dump(2) << '\n';
  }

  // Final-round metrics per (method, metric) across seeds.
  std::map<std::pair<std::uint64_t, std::string>, std::size_t> last_round;
  for (const auto& r : result.rows) {
    auto& lr = last_round[{r.seed, r.method}];
    lr = std::max(lr, r.round);
  }
  std::map<std::string, std::map<std::string, std::vector<double>>> finals;
  for (const auto& r : result.rows) {
    if (r.round == last_round[{r.seed, r.method}]) finals[r.method][r.metric].push_back(r.value);
  }
  json methods = json::object();
  for (const auto& [method, metrics] : finals) {
    json entry = json::object();
    for (const auto& [metric, values] : metrics) {
      const auto ms = loop::mean_sem(values);
      entry[metric] = {{"mean", ms.mean}, {"sem", ms.sem}, {"n", ms.n}};
    }
    methods[method] = entry;
  }
  json summary = {{"rounds", cfg.rounds},
                  {"seeds", cfg.seeds.size()},
                  {"final_round", methods},
                  {"diagnostics", {{"truncated_runs", result.truncated_runs}, {"nll_clamped", result.nll_clamped}}}};
  std::ofstream out(dir / "summary.json", std::ios::binary);
  out << summary.dump(2) << '\n';
}

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
    const auto result = run_experiment(cfg);
    write_outputs(cfg, result, cfg.output_dir);
    if (result.truncated_runs > 0) {
      err << "warning: " << result.truncated_runs << " run(s) exhausted the pool before " << cfg.rounds << " rounds\n";
    }
    out << "wrote " << result.rows.size() << " rows to " << (std::filesystem::path(cfg.output_dir) / "results.csv").string()
        << '\n';
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ExperimentError& e) {
    err << "run failed (" << e.what() << ")\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "seed,method,round,metric,value") {
    throw ParseError(path.string() + ":1: unexpected header");
  }
  std::vector<ResultRow> rows;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    auto fail = [&] { return ParseError(path.string() + ":" + std::to_string(n) + ": malformed row"); };
    if (f.size() != 5) throw fail();
    ResultRow r{};
    auto parse = [&](const std::string& s, auto& v) {
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw fail();
    };
    parse(f[0], r.seed);
    r.method = f[1];
    parse(f[2], r.round);
    r.metric = f[3];
    parse(f[4], r.value);
    rows.push_back(std::move(r));
  }
  return rows;
}

int cmd_plotdata(const std::filesystem::path& results, const std::string& metric, const std::filesystem::path& out_path,
                 std::ostream& err) {
  std::vector<ResultRow> rows;
  try {
    rows = read_results(results);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
  for (const auto& r : rows) {
    if (r.metric == metric) groups[{r.method, r.round}].push_back(r.value);
  }
  if (groups.empty()) {
    err << "error: unknown metric '" << metric << "'\n";
    return kConfigError;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    err << "error: cannot write " << out_path.string() << '\n';
    return kFailure;
  }
  out << "method,round,mean,sem\n";
  for (const auto& [key, values] : groups) {
    const auto ms = loop::mean_sem(values);
    out << key.first << ',' << key.second << ',' << format_double(ms.mean) << ',' << format_double(ms.sem) << '\n';
  }
  return kOk;
}

}  // namespace bal::cli
