#include "wzb/svm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "wzb/error.hpp"
#include "wzb/io.hpp"
#include "wzb/parallel.hpp"

namespace wzb {
namespace {

constexpr double kTau = 1e-12;
constexpr std::string_view kModelMagic = "wzb-svm-model";
constexpr int kModelVersion = 1;

bool is_upper_bound(double a, double c) { return a >= c; }
bool is_lower_bound(double a) { return a <= 0.0; }

// I_up: the variable may move so as to decrease -y*G.
bool in_up(int y, double a, double c) { return (y == 1 && !is_upper_bound(a, c)) || (y == -1 && !is_lower_bound(a)); }
bool in_low(int y, double a, double c) {
  return (y == 1 && !is_lower_bound(a)) || (y == -1 && !is_upper_bound(a, c));
}

double compute_rho(std::span<const int> y, std::span<const double> alpha, std::span<const double> grad, double c) {
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double yg = y[i] * grad[i];
    if (is_upper_bound(alpha[i], c)) {
      if (y[i] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (is_lower_bound(alpha[i])) {
      if (y[i] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  return n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
}

std::vector<double> gradient(std::span<const double> kernel, std::span<const int> y, std::span<const double> alpha) {
  const std::size_t l = y.size();
  std::vector<double> g(l, -1.0);
  for (std::size_t j = 0; j < l; ++j) {
    if (alpha[j] == 0.0) continue;
    for (std::size_t i = 0; i < l; ++i) g[i] += y[i] * y[j] * kernel[i * l + j] * alpha[j];
  }
  return g;
}

std::vector<BehaviorLabel> present_classes(std::span<const TrainingExample> data) {
  std::vector<BehaviorLabel> classes;
  for (const TrainingExample& e : data) {
    if (std::find(classes.begin(), classes.end(), e.label) == classes.end()) classes.push_back(e.label);
  }
  std::sort(classes.begin(), classes.end());
  return classes;
}

std::vector<double> powers_of_two(int from, int to, int step) {
  std::vector<double> out;
  for (int e = from; e <= to; e += step) out.push_back(std::ldexp(1.0, e));
  return out;
}

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

std::vector<double> kernel_matrix(std::span<const Point> points, double gamma) {
  const std::size_t l = points.size();
  std::vector<double> k(l * l);
  for (std::size_t i = 0; i < l; ++i) {
    k[i * l + i] = 1.0;
    for (std::size_t j = i + 1; j < l; ++j) {
      const double v = rbf_kernel(points[i], points[j], gamma);
      k[i * l + j] = v;
      k[j * l + i] = v;
    }
  }
  return k;
}

DualSolution solve_dual(std::span<const double> kernel, std::span<const int> y, double c, const SolverOptions& opts) {
  const std::size_t l = y.size();
  if (kernel.size() != l * l) throw Error(ErrorCode::InvalidArgument, "kernel matrix size mismatch");
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "box constraint must be positive");
  const auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * kernel[i * l + j]; };

  DualSolution sol;
  sol.alpha.assign(l, 0.0);
  std::vector<double> g(l, -1.0);
  std::vector<double>& alpha = sol.alpha;
  const std::size_t max_iter = opts.max_iter > 0 ? opts.max_iter : std::max<std::size_t>(10'000'000, 100 * l);

  std::size_t iter = 0;
  while (true) {
    // First index: maximal -y*G over I_up.
    double g_max = -std::numeric_limits<double>::infinity();
    std::size_t i = l;
    for (std::size_t t = 0; t < l; ++t) {
      if (in_up(y[t], alpha[t], c) && -y[t] * g[t] >= g_max) {
        g_max = -y[t] * g[t];
        i = t;
      }
    }
    // Second index: largest decrease of the second-order model over I_low.
    double g_max2 = -std::numeric_limits<double>::infinity();
    double obj_min = std::numeric_limits<double>::infinity();
    std::size_t j = l;
    for (std::size_t t = 0; t < l; ++t) {
      if (!in_low(y[t], alpha[t], c)) continue;
      g_max2 = std::max(g_max2, y[t] * g[t]);
      if (i == l) continue;
      const double b = g_max + y[t] * g[t];
      if (b > 0.0) {
        double a = kernel[i * l + i] + kernel[t * l + t] - 2.0 * kernel[i * l + t];
        if (a <= 0.0) a = kTau;
        if (-(b * b) / a <= obj_min) {
          obj_min = -(b * b) / a;
          j = t;
        }
      }
    }
    if (g_max + g_max2 < opts.eps || i == l || j == l) break;
    if (++iter > max_iter) {
      throw Error(ErrorCode::SolverNonConvergence, "SMO hit the iteration cap of " + std::to_string(max_iter));
    }

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = kernel[i * l + i] + kernel[j * l + j] + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = kernel[i * l + i] + kernel[j * l + j] - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < l; ++t) g[t] += q(t, i) * dai + q(t, j) * daj;
  }

  sol.iterations = iter;
  sol.rho = compute_rho(y, alpha, g, c);
  double obj = 0.0;
  for (std::size_t t = 0; t < l; ++t) obj += alpha[t] * (g[t] - 1.0);
  sol.objective = obj / 2.0;
  return sol;
}

double dual_objective(std::span<const double> kernel, std::span<const int> y, std::span<const double> alpha) {
  const std::vector<double> g = gradient(kernel, y, alpha);
  double obj = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) obj += alpha[t] * (g[t] - 1.0);
  return obj / 2.0;
}

double kkt_violation(std::span<const double> kernel, std::span<const int> y, std::span<const double> alpha,
                     double c) {
  const std::vector<double> g = gradient(kernel, y, alpha);
  double up = -std::numeric_limits<double>::infinity();
  double low = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double v = -y[t] * g[t];
    if (in_up(y[t], alpha[t], c)) up = std::max(up, v);
    if (in_low(y[t], alpha[t], c)) low = std::min(low, v);
  }
  if (!std::isfinite(up) || !std::isfinite(low)) return 0.0;
  return std::max(0.0, up - low);
}

double PairMachine::decision(std::span<const double> x, double gamma) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) sum += coef[i] * rbf_kernel(support_vectors[i], x, gamma);
  return sum - rho;
}

BehaviorLabel SvmModel::predict(const FeatureVector& f) const {
  const FeatureArray x = scaler.normalize(f);
  return predict_normalized(x);
}

BehaviorLabel SvmModel::predict_normalized(std::span<const double> x) const {
  std::vector<std::size_t> votes(classes.size(), 0);
  for (const PairMachine& m : machines) ++votes[m.decision(x, gamma) > 0.0 ? m.first : m.second];
  const auto best = std::max_element(votes.begin(), votes.end());  // first maximum = lowest index
  return classes[static_cast<std::size_t>(best - votes.begin())];
}

SvmModel train_svm(std::span<const TrainingExample> data, double c, double gamma, const SolverOptions& opts) {
  if (!(c > 0.0) || !(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "c and gamma must be positive");
  SvmModel model;
  model.classes = present_classes(data);
  if (model.classes.size() < 2) throw Error(ErrorCode::SingleClassData, "training needs at least two labels");
  model.c = c;
  model.gamma = gamma;

  std::vector<FeatureVector> feats;
  feats.reserve(data.size());
  for (const TrainingExample& e : data) feats.push_back(e.features);
  model.scaler = FeatureScaler::fit(feats);

  std::vector<std::vector<Point>> by_class(model.classes.size());
  for (const TrainingExample& e : data) {
    const auto idx = static_cast<std::size_t>(
        std::find(model.classes.begin(), model.classes.end(), e.label) - model.classes.begin());
    const FeatureArray x = model.scaler.normalize(e.features);
    by_class[idx].emplace_back(x.begin(), x.end());
  }

  const std::size_t n = model.classes.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  }
  model.machines.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto [a, b] = pairs[p];
    std::vector<Point> pts = by_class[a];
    pts.insert(pts.end(), by_class[b].begin(), by_class[b].end());
    std::vector<int> y(pts.size(), -1);
    std::fill_n(y.begin(), by_class[a].size(), 1);
    const DualSolution sol = solve_dual(kernel_matrix(pts, gamma), y, c, opts);

    PairMachine& m = model.machines[p];
    m.first = a;
    m.second = b;
    m.rho = sol.rho;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (sol.alpha[i] > 0.0) {
        m.support_vectors.push_back(pts[i]);
        m.coef.push_back(sol.alpha[i] * y[i]);
      }
    }
  });
  return model;
}

double accuracy(const SvmModel& model, std::span<const TrainingExample> data) {
  if (data.empty()) return 0.0;
  std::size_t hit = 0;
  for (const TrainingExample& e : data) hit += model.predict(e.features) == e.label ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

std::vector<std::size_t> stratified_folds(std::span<const TrainingExample> data, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "cross-validation needs at least 2 folds");
  std::map<BehaviorLabel, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < data.size(); ++i) members[data[i].label].push_back(i);
  for (const auto& [label, idx] : members) {
    if (idx.size() < folds) {
      throw Error(ErrorCode::InsufficientClassSamples, "label " + std::string(to_string(label)) + " has only " +
                                                           std::to_string(idx.size()) + " samples for " +
                                                           std::to_string(folds) + " folds");
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold_of(data.size(), 0);
  std::size_t next = 0;
  for (auto& [label, idx] : members) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i : idx) fold_of[i] = next++ % folds;
  }
  return fold_of;
}

namespace {

double cv_with_folds(std::span<const TrainingExample> data, const std::vector<std::size_t>& fold_of,
                     std::size_t folds, double c, double gamma) {
  std::size_t hit = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<TrainingExample> train;
    std::vector<TrainingExample> test;
    for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? test : train).push_back(data[i]);
    const SvmModel m = train_svm(train, c, gamma);
    for (const TrainingExample& e : test) hit += m.predict(e.features) == e.label ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

}  // namespace

double cross_validate(std::span<const TrainingExample> data, double c, double gamma, std::size_t folds,
                      std::uint64_t seed) {
  return cv_with_folds(data, stratified_folds(data, folds, seed), folds, c, gamma);
}

GridSearchResult grid_search(std::span<const TrainingExample> data, std::span<const double> c_grid,
                             std::span<const double> gamma_grid, std::size_t folds, std::uint64_t seed) {
  if (c_grid.empty() || gamma_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty parameter grid");
  const std::vector<std::size_t> fold_of = stratified_folds(data, folds, seed);
  std::vector<double> scores(c_grid.size() * gamma_grid.size(), -1.0);
  parallel_for(scores.size(), [&](std::size_t cell) {
    const double c = c_grid[cell / gamma_grid.size()];
    const double gamma = gamma_grid[cell % gamma_grid.size()];
    try {
      scores[cell] = cv_with_folds(data, fold_of, folds, c, gamma);
    } catch (const Error& e) {
      // A cell whose folds cannot be trained scores zero; the search goes on.
      if (e.code() != ErrorCode::SolverNonConvergence && e.code() != ErrorCode::DegenerateFeatureRange) throw;
      scores[cell] = 0.0;
    }
  });

  GridSearchResult best{0.0, 0.0, -1.0};
  for (std::size_t cell = 0; cell < scores.size(); ++cell) {
    const double c = c_grid[cell / gamma_grid.size()];
    const double gamma = gamma_grid[cell % gamma_grid.size()];
    const bool better = scores[cell] > best.cv_accuracy ||
                        (scores[cell] == best.cv_accuracy &&
                         (c < best.c || (c == best.c && gamma < best.gamma)));
    if (better) best = {c, gamma, scores[cell]};
  }
  return best;
}

std::vector<double> default_c_grid() { return powers_of_two(-5, 15, 2); }
std::vector<double> default_gamma_grid() { return powers_of_two(-15, 3, 2); }

std::string serialize_model(const SvmModel& model) {
  std::ostringstream out;
  const auto row = [&](std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << io::format_double(v[i]);
    out << '\n';
  };
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "kernel rbf\n";
  out << "c " << io::format_double(model.c) << '\n';
  out << "gamma " << io::format_double(model.gamma) << '\n';
  out << "features " << kFeatureCount << '\n';
  out << "classes " << model.classes.size();
  for (BehaviorLabel l : model.classes) out << ' ' << to_string(l);
  out << '\n';
  out << "feat_min ";
  row(model.scaler.feat_min);
  out << "feat_max ";
  row(model.scaler.feat_max);
  out << "machines " << model.machines.size() << '\n';
  for (const PairMachine& m : model.machines) {
    out << "pair " << m.first << ' ' << m.second << " rho " << io::format_double(m.rho) << " nsv "
        << m.support_vectors.size() << '\n';
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
      out << io::format_double(m.coef[i]) << ' ';
      row(m.support_vectors[i]);
    }
  }
  out << "end\n";
  return out.str();
}

namespace {

class Tokens {
 public:
  explicit Tokens(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
      const std::size_t start = pos;
      while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos > start) toks_.push_back(text.substr(start, pos - start));
    }
  }
  std::string_view next() {
    if (at_ >= toks_.size()) throw Error(ErrorCode::MalformedModel, "unexpected end of model file");
    return toks_[at_++];
  }
  void expect(std::string_view word) {
    const std::string_view got = next();
    if (got != word) {
      throw Error(ErrorCode::MalformedModel, "expected '" + std::string(word) + "', got '" + std::string(got) + "'");
    }
  }
  double number() {
    try {
      return io::parse_double(next(), "model value");
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedModel, e.what());
    }
  }
  std::size_t count() {
    const double v = number();
    if (v < 0 || v != std::floor(v)) throw Error(ErrorCode::MalformedModel, "expected a count");
    return static_cast<std::size_t>(v);
  }

 private:
  std::vector<std::string_view> toks_;
  std::size_t at_ = 0;
};

}  // namespace

SvmModel parse_model(std::string_view text) {
  Tokens tok(text);
  tok.expect(kModelMagic);
  if (tok.count() != kModelVersion) throw Error(ErrorCode::MalformedModel, "unsupported model version");
  tok.expect("kernel");
  tok.expect("rbf");
  SvmModel m;
  tok.expect("c");
  m.c = tok.number();
  tok.expect("gamma");
  m.gamma = tok.number();
  tok.expect("features");
  if (tok.count() != kFeatureCount) throw Error(ErrorCode::MalformedModel, "feature count mismatch");
  tok.expect("classes");
  const std::size_t n = tok.count();
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = parse_behavior(tok.next());
    if (!label || !is_poi_label(*label)) throw Error(ErrorCode::MalformedModel, "bad class label");
    m.classes.push_back(*label);
  }
  tok.expect("feat_min");
  for (double& v : m.scaler.feat_min) v = tok.number();
  tok.expect("feat_max");
  for (double& v : m.scaler.feat_max) v = tok.number();
  tok.expect("machines");
  const std::size_t n_machines = tok.count();
  if (n_machines != n * (n - 1) / 2) throw Error(ErrorCode::MalformedModel, "machine count does not match classes");
  for (std::size_t k = 0; k < n_machines; ++k) {
    PairMachine pm;
    tok.expect("pair");
    pm.first = tok.count();
    pm.second = tok.count();
    if (pm.first >= n || pm.second >= n || pm.first >= pm.second) {
      throw Error(ErrorCode::MalformedModel, "bad class pair");
    }
    tok.expect("rho");
    pm.rho = tok.number();
    tok.expect("nsv");
    const std::size_t nsv = tok.count();
    for (std::size_t s = 0; s < nsv; ++s) {
      pm.coef.push_back(tok.number());
      Point p(kFeatureCount);
      for (double& v : p) v = tok.number();
      pm.support_vectors.push_back(std::move(p));
    }
    m.machines.push_back(std::move(pm));
  }
  tok.expect("end");
  return m;
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize_model(model));
}

SvmModel load_model(const std::filesystem::path& path) { return parse_model(io::read_file(path)); }

}  // namespace wzb
