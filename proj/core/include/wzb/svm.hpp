#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wzb/behavior.hpp"
#include "wzb/features.hpp"

namespace wzb {

inline constexpr double kDefaultC = 1.0;
inline constexpr double kDefaultGamma = 4.0;

using Point = std::vector<double>;

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// Dense l x l RBF kernel matrix, row-major.
std::vector<double> kernel_matrix(std::span<const Point> points, double gamma);

struct SolverOptions {
  double eps = 1e-3;           // stopping tolerance on the maximal KKT violation
  std::size_t max_iter = 0;    // 0 selects max(10^7, 100 l)
};

/// Solution of the binary C-SVC dual
///   min 1/2 a'Qa - e'a   s.t. y'a = 0, 0 <= a_i <= C,   Q_ij = y_i y_j K_ij.
struct DualSolution {
  std::vector<double> alpha;
  double rho = 0.0;  // decision(x) = sum_i alpha_i y_i K(x_i, x) - rho
  double objective = 0.0;
  std::size_t iterations = 0;
};

/// SMO with second-order working-set selection. `kernel` is l x l row-major,
/// labels are +1/-1. Throws SolverNonConvergence when the iteration cap is hit.
DualSolution solve_dual(std::span<const double> kernel, std::span<const int> y, double c,
                        const SolverOptions& opts = {});

double dual_objective(std::span<const double> kernel, std::span<const int> y, std::span<const double> alpha);

/// Maximal violating-pair gap m(a) - M(a); zero at an exact KKT point.
double kkt_violation(std::span<const double> kernel, std::span<const int> y, std::span<const double> alpha,
                     double c);

/// One of the one-vs-one machines; positive decision votes for `first`.
struct PairMachine {
  std::size_t first = 0;   // index into SvmModel::classes
  std::size_t second = 0;
  std::vector<Point> support_vectors;  // normalized feature space
  std::vector<double> coef;            // alpha_i * y_i
  double rho = 0.0;

  double decision(std::span<const double> x, double gamma) const;
};

struct SvmModel {
  std::vector<BehaviorLabel> classes;  // ascending label order
  double c = kDefaultC;
  double gamma = kDefaultGamma;
  FeatureScaler scaler;
  std::vector<PairMachine> machines;  // (0,1), (0,2), ..., (n-2,n-1)

  BehaviorLabel predict(const FeatureVector& f) const;
  /// Majority vote; ties go to the lowest class index.
  BehaviorLabel predict_normalized(std::span<const double> x) const;
};

struct TrainingExample {
  FeatureVector features;
  BehaviorLabel label = BehaviorLabel::LA;
};

/// One-vs-one RBF C-SVC. Normalization is fitted on `data` and stored in the model.
SvmModel train_svm(std::span<const TrainingExample> data, double c = kDefaultC, double gamma = kDefaultGamma,
                   const SolverOptions& opts = {});

double accuracy(const SvmModel& model, std::span<const TrainingExample> data);

struct GridSearchResult {
  double c = 0.0;
  double gamma = 0.0;
  double cv_accuracy = 0.0;
};

/// Stratified k-fold cross-validation over the grid. Ties prefer smaller c, then smaller gamma.
GridSearchResult grid_search(std::span<const TrainingExample> data, std::span<const double> c_grid,
                             std::span<const double> gamma_grid, std::size_t folds, std::uint64_t seed);

/// Pooled accuracy of a stratified k-fold run at fixed (c, gamma).
double cross_validate(std::span<const TrainingExample> data, double c, double gamma, std::size_t folds,
                      std::uint64_t seed);

/// Fold index per example; deterministic in `seed`.
std::vector<std::size_t> stratified_folds(std::span<const TrainingExample> data, std::size_t folds,
                                          std::uint64_t seed);

std::vector<double> default_c_grid();      // 2^-5, 2^-3, ..., 2^15
std::vector<double> default_gamma_grid();  // 2^-15, 2^-13, ..., 2^3

/// Versioned text form; doubles are written in shortest round-trip notation.
std::string serialize_model(const SvmModel& model);
SvmModel parse_model(std::string_view text);
void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace wzb
