#pragma once

#include <utility>
#include <vector>

#include "mlda/dataset.hpp"
#include "mlda/errors.hpp"
#include "mlda/matcore.hpp"

namespace mlda {

enum class Loss { squared, logistic };
enum class Penalty { nuclear, lasso };
enum class StepRule { fixed_lipschitz, backtracking };

struct FitConfig {
  Loss loss = Loss::squared;
  Penalty penalty = Penalty::nuclear;
  double omega = 0.0;  // must be set to a positive value
  int max_iter = 2000;
  double rel_tol = 1e-7;
  StepRule step_rule = StepRule::fixed_lipschitz;
  double backtrack_factor = 0.5;
  bool restart = true;
};

void validate(const FitConfig& cfg);

struct SolverResult {
  Mat b_hat;
  double beta0_hat = 0.0;
  std::vector<double> objective_trace;  // nonincreasing when restart is enabled
  int iterations = 0;
  bool converged = false;
  double final_grad_map_norm = 0.0;
};

/// Penalized empirical risk: the smooth loss plus omega times the penalty on B.
double objective(const Dataset& data, const Vec& y, double beta0, const Mat& B,
                 const FitConfig& cfg);

/// The smooth part alone. Squared: (1/2n) sum (y_i - beta0 - <X_i,B>)^2.
/// Logistic: (1/n) sum log(1 + exp(-sign(y_i) (beta0 + <X_i,B>))).
double smooth_loss(const Dataset& data, const Vec& y, double beta0, const Mat& B, Loss loss);

/// Gradient of the smooth part in (B, beta0).
std::pair<Mat, double> smooth_gradient(const Dataset& data, const Vec& y, double beta0,
                                       const Mat& B, Loss loss);

/// lambda_max of the Gram operator of the design rows [1, vec(X_i)] divided by n,
/// computed matrix-free by power iteration (relative tolerance 1e-6) and inflated
/// by 1.01. With with_intercept = false the constant column is dropped.
double lipschitz_estimate(const Dataset& data, bool with_intercept = true);

/// Monotone FISTA for the penalized problem; beta0 rides along unpenalized.
SolverResult fit_penalized(const Dataset& data, const Vec& y, const FitConfig& cfg);
SolverResult fit_penalized(const Dataset& data, const Vec& y, const FitConfig& cfg,
                           const Mat& init_b, double init_beta0);

namespace detail {

/// Flattened view of a fitting problem, built once and shared across a
/// regularization path.
struct FlatProblem {
  Mat design;       // n x (p*q), rows are vec(X_i)^T
  Vec y;            // responses (logistic uses their signs)
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  Loss loss = Loss::squared;
  double gram_lipschitz = 0.0;  // lambda_max([1 D]^T [1 D]) / n, inflated
};

FlatProblem make_flat(const Dataset& data, const Vec& y, Loss loss);

SolverResult fit_flat(const FlatProblem& prob, const FitConfig& cfg, const Mat* init_b,
                      double init_beta0);

double flat_smooth_loss(const FlatProblem& prob, double beta0, const Vec& vb);
double gram_power_lipschitz(const Mat& design, bool with_intercept);

}  // namespace detail

}  // namespace mlda
