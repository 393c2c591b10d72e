#pragma once

#include <utility>

#include "mlda/dataset.hpp"
#include "mlda/solver.hpp"

namespace mlda {

/// Class-coded responses: -n/n1 for class 1, +n/n2 for class 2. They sum to zero.
Vec encode_responses(const Dataset& data);

/// Per-class sample means (mu1, mu2).
std::pair<Mat, Mat> class_means(const Dataset& data);

/// vec(B)^T Sigma_hat vec(B) with the pooled within-class covariance
/// (denominator n - 2), computed without materializing Sigma_hat.
double pooled_quadratic_form(const Dataset& data, const Mat& B);

struct InterceptResult {
  double beta0_tilde = 0.0;
  Mat b_oriented;
  bool flipped = false;  // true when -B was used
};

/// Closed-form optimal intercept for the rule <X, B> + beta0 > 0. Flips the
/// sign of B when the mean-difference projection is negative; throws
/// degenerate_direction_error when the projection vanishes.
InterceptResult optimal_intercept(const Dataset& data, const Mat& B);

struct FitDiagnostics {
  int iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
  double grad_map_norm = 0.0;
  double solver_beta0 = 0.0;  // pre-correction intercept from the solver
  bool flipped = false;       // direction sign flipped by the intercept correction
};

struct DiscriminantModel {
  Mat b_hat;                  // oriented direction used by classify
  double beta0_tilde = 0.0;   // intercept used by classify
  double omega = 0.0;
  int rank = 0;
  Vec singulars;
  FitDiagnostics diagnostics;
};

/// Builds a DiscriminantModel from a solver result. With correct_intercept the
/// Eq.-style closed-form intercept replaces the solver's; a rank-0 direction
/// falls back to the prior log-odds log(n2/n1).
DiscriminantModel finalize_model(const Dataset& data, const SolverResult& fit, double omega,
                                 bool correct_intercept = true);

/// encode_responses -> fit_penalized -> optimal intercept.
DiscriminantModel fit_matrix_lda(const Dataset& data, const FitConfig& cfg);

double score(const DiscriminantModel& model, const Mat& X);

/// 2 iff <X, b_hat> + beta0_tilde > 0, else 1 (exact ties go to class 1).
int classify(const DiscriminantModel& model, const Mat& X);

}  // namespace mlda
