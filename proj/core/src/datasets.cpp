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

#include "bal/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "bal/random.hpp"

namespace bal::datasets {

namespace {

double normal_density(double x, double mu, double sigma) {
  const double u = (x - mu) / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

Vec linspace(double lo, double hi, Eigen::Index n) { return Vec::LinSpaced(n, lo, hi); }

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  rng.shuffle(idx);
  idx.resize(k);
  return idx;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Mat rows_of(const Mat& x, const std::vector<std::size_t>& rows) {
  Mat out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace

Standardizer Standardizer::fit(const Mat& x) {
  if (x.rows() == 0) throw InsufficientDataError("cannot standardize zero rows");
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  s.scale = ((x.rowwise() - s.mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
  for (auto& v : s.scale) {
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

Mat Standardizer::apply(const Mat& x) const {
  if (x.cols() != mean.size()) throw ShapeError("standardizer applied to the wrong number of features");
  return ((x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

double synth_1d_function(double x) {
  return 2.0 * std::sin(2.0 * x) + 8.0 * normal_density(x, 2.5, 0.5) + 10.0 * normal_density(x, 7.5, 0.25) -
         6.0 * normal_density(x, -4.5, 0.5);
}

RegressionTask synth_1d(std::uint64_t seed) {
  const Rng root(seed);
  RegressionTask t;
  t.name = "synth_1d";
  t.seed = seed;
  t.noise_var = kSynth1dNoiseVar;
  t.pool_x = linspace(-8.0, 8.0, 65);
  t.context_x = linspace(-8.0, 8.0, 49);
  t.test_x = linspace(-8.0, 8.0, 97);
  const double sd = std::sqrt(kSynth1dNoiseVar);
  Rng pool_noise = root.split("pool_labels");
  t.pool_y.resize(t.pool_x.rows());
  for (Eigen::Index i = 0; i < t.pool_x.rows(); ++i) t.pool_y[i] = synth_1d_function(t.pool_x(i, 0)) + sd * pool_noise.normal();
  Rng test_noise = root.split("test_labels");
  t.test_y.resize(t.test_x.rows());
  for (Eigen::Index i = 0; i < t.test_x.rows(); ++i) t.test_y[i] = synth_1d_function(t.test_x(i, 0)) + sd * test_noise.normal();
  t.initial = sample_without_replacement(static_cast<std::size_t>(t.pool_x.rows()), 3, root.split("initial"));
  return t;
}

Eigen::Index Table::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("column '" + name + "' not found in CSV header");
  return static_cast<Eigen::Index>(it - header.begin());
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV file " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  t.header = split_line(line);
  if (t.header.empty()) throw ParseError(path.string() + ": empty header");
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                       " cells, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto& c = cells[j];
      const char* first = c.data();
      const char* last = c.data() + c.size();
      if (!c.empty() && *first == '+') ++first;
      const auto res = std::from_chars(first, last, row[j]);
      if (c.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(row[j])) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": column '" + t.header[j] +
                         "' has non-numeric value '" + c + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return t;
}

namespace {

void split_features(const Table& t, const std::string& target, Mat& x, Vec& y) {
  const auto tc = t.column(target);
  y = t.values.col(tc);
  x.resize(t.values.rows(), t.values.cols() - 1);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < t.values.cols(); ++j) {
    if (j != tc) x.col(k++) = t.values.col(j);
  }
  if (x.cols() == 0) throw ValidationError("CSV has no feature columns besides the target");
}

}  // namespace

RegressionTask make_regression_task(std::string name, const Mat& x, const Vec& y, const CsvRegressionOptions& o,
                                    std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (o.test_size == 0) throw ValidationError("test_size must be at least 1");
  if (o.test_size + std::max<std::size_t>(o.n_initial, 1) > n) {
    throw ValidationError("dataset has " + std::to_string(n) + " rows; test_size " + std::to_string(o.test_size) +
                          " plus " + std::to_string(o.n_initial) + " initial labels does not fit");
  }
  const Rng root(seed);
  const auto order = sample_without_replacement(n, n, root.split("split"));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(o.test_size));
  std::vector<std::size_t> pool(order.begin() + static_cast<std::ptrdiff_t>(o.test_size), order.end());

  const Mat pool_raw = rows_of(x, pool);
  const auto standardizer = Standardizer::fit(pool_raw);

  RegressionTask t;
  t.name = std::move(name);
  t.seed = seed;
  t.pool_x = standardizer.apply(pool_raw);
  t.test_x = standardizer.apply(rows_of(x, test));
  t.pool_y.resize(static_cast<Eigen::Index>(pool.size()));
  for (std::size_t i = 0; i < pool.size(); ++i) t.pool_y[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(pool[i])];
  t.test_y.resize(static_cast<Eigen::Index>(test.size()));
  for (std::size_t i = 0; i < test.size(); ++i) t.test_y[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(test[i])];
  t.initial = sample_without_replacement(pool.size(), o.n_initial, root.split("initial"));

  if (o.contexts == ContextSource::Test) {
    t.context_x = t.test_x;
  } else {
    const std::size_t m = o.n_contexts == 0 ? o.test_size : o.n_contexts;
    if (m > pool.size()) throw ValidationError("more contexts requested than pool rows");
    t.context_x = rows_of(t.pool_x, sample_without_replacement(pool.size(), m, root.split("contexts")));
  }
  return t;
}

RegressionTask load_csv_regression(const std::filesystem::path& path, const CsvRegressionOptions& options,
                                   std::uint64_t seed) {
  const auto table = read_csv(path);
  Mat x;
  Vec y;
  split_features(table, options.target, x, y);
  return make_regression_task(path.stem().string(), x, y, options, seed);
}

ClassificationTask make_classification_task(std::string name, const Mat& x, std::vector<int> y, int n_classes,
                                            const StratifyOptions& o, std::uint64_t seed) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ShapeError("features and labels differ in length");
  if (n_classes < 2) throw ValidationError("classification needs at least two classes");
  const std::size_t per_ctx = o.per_class_context == 0 ? o.per_class_test : o.per_class_context;
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= n_classes) throw ValidationError("label " + std::to_string(y[i]) + " out of range");
    by_class[static_cast<std::size_t>(y[i])].push_back(i);
  }

  const Rng root(seed);
  ClassificationTask t;
  t.name = std::move(name);
  t.seed = seed;
  t.n_classes = n_classes;
  t.class_weights = o.class_weights.size() == 0 ? Vec::Ones(n_classes) : o.class_weights;
  if (t.class_weights.size() != n_classes) throw ValidationError("class weight count does not match the class count");
  if (!(t.class_weights.minCoeff() > 0.0)) throw ValidationError("class weights must be positive");

  std::vector<std::size_t> non_test;
  for (int k = 0; k < n_classes; ++k) {
    auto rows = by_class[static_cast<std::size_t>(k)];
    const std::size_t need = o.per_class_test + o.n_initial_per_class;
    if (rows.size() < need || rows.size() - o.per_class_test < per_ctx) {
      throw ValidationError("class " + std::to_string(k) + " has " + std::to_string(rows.size()) +
                            " examples; the stratified split needs " + std::to_string(std::max(need, o.per_class_test + per_ctx)));
    }
    Rng rng = root.split("class").split(static_cast<std::uint64_t>(k));
    rng.shuffle(rows);
    std::size_t i = 0;
    for (; i < o.per_class_test; ++i) t.test.push_back(rows[i]);
    std::vector<std::size_t> rest(rows.begin() + static_cast<std::ptrdiff_t>(i), rows.end());
    for (std::size_t j = 0; j < rest.size(); ++j) (j < o.n_initial_per_class ? t.initial : t.pool).push_back(rest[j]);
    non_test.insert(non_test.end(), rest.begin(), rest.end());
    auto ctx = rest;
    Rng crng = root.split("contexts").split(static_cast<std::uint64_t>(k));
    crng.shuffle(ctx);
    t.contexts.insert(t.contexts.end(), ctx.begin(), ctx.begin() + static_cast<std::ptrdiff_t>(per_ctx));
  }
  std::sort(t.test.begin(), t.test.end());
  std::sort(t.initial.begin(), t.initial.end());
  std::sort(t.pool.begin(), t.pool.end());
  std::sort(t.contexts.begin(), t.contexts.end());
  std::sort(non_test.begin(), non_test.end());

  const auto standardizer = Standardizer::fit(rows_of(x, non_test));
  t.x = standardizer.apply(x);
  t.y = std::move(y);
  return t;
}

ClassificationTask load_csv_classification(const std::filesystem::path& path, const CsvClassificationOptions& options,
                                           std::uint64_t seed) {
  const auto table = read_csv(path);
  Mat x;
  Vec raw;
  split_features(table, options.target, x, raw);
  std::map<double, int> codes;
  for (double v : raw) codes.emplace(v, 0);
  int next = 0;
  for (auto& [value, code] : codes) code = next++;
  std::vector<int> y(static_cast<std::size_t>(raw.size()));
  for (Eigen::Index i = 0; i < raw.size(); ++i) y[static_cast<std::size_t>(i)] = codes.at(raw[i]);
  return make_classification_task(path.stem().string(), x, std::move(y), next, options, seed);
}

ClassificationTask synth_blobs(const BlobOptions& o, std::uint64_t seed) {
  const Rng root(seed);
  const Rng data = o.data_seed ? Rng(*o.data_seed) : root;
  Rng centre_rng = data.split("centres");
  Mat centres(o.n_classes, o.dim);
  for (Eigen::Index k = 0; k < centres.rows(); ++k) {
    for (Eigen::Index d = 0; d < centres.cols(); ++d) centres(k, d) = o.separation * centre_rng.normal();
  }
  Rng point_rng = data.split("points");
  const auto n = static_cast<Eigen::Index>(o.per_class) * o.n_classes;
  Mat x(n, o.dim);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = static_cast<int>(i / static_cast<Eigen::Index>(o.per_class));
    y[static_cast<std::size_t>(i)] = k;
    for (Eigen::Index d = 0; d < o.dim; ++d) x(i, d) = centres(k, d) + point_rng.normal();
  }
  return make_classification_task("synth_blobs", x, std::move(y), o.n_classes, o.split, root.split("split").key());
}

}  // namespace bal::datasets
