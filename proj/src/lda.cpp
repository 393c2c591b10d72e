#include "mlda/lda.hpp"

#include <cmath>
#include <stdexcept>

#include "mlda/errors.hpp"

namespace mlda {

Vec encode_responses(const Dataset& data) {
  if (data.n1() < 1 || data.n2() < 1)
    throw std::invalid_argument("encode_responses: both classes must be nonempty");
  const double n = data.size();
  Vec y(data.size());
  for (int i = 0; i < data.size(); ++i)
    y(i) = data.label(i) == 1 ? -n / data.n1() : n / data.n2();
  return y;
}

std::pair<Mat, Mat> class_means(const Dataset& data) {
  if (data.n1() < 1 || data.n2() < 1)
    throw std::invalid_argument("class_means: both classes must be nonempty");
  Mat mu1 = Mat::Zero(data.rows(), data.cols());
  Mat mu2 = Mat::Zero(data.rows(), data.cols());
  for (int i = 0; i < data.size(); ++i)
    (data.label(i) == 1 ? mu1 : mu2) += data.sample(i);
  mu1 /= data.n1();
  mu2 /= data.n2();
  return {std::move(mu1), std::move(mu2)};
}

double pooled_quadratic_form(const Dataset& data, const Mat& B) {
  if (data.size() <= 2)
    throw std::invalid_argument("pooled_quadratic_form: needs more than two samples");
  if (B.rows() != data.rows() || B.cols() != data.cols())
    throw std::invalid_argument("pooled_quadratic_form: dimension mismatch");
  const auto [mu1, mu2] = class_means(data);
  double acc = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const Mat& mu = data.label(i) == 1 ? mu1 : mu2;
    const double proj = ((data.sample(i) - mu).array() * B.array()).sum();
    acc += proj * proj;
  }
  return acc / (data.size() - 2);
}

InterceptResult optimal_intercept(const Dataset& data, const Mat& B) {
  if (B.rows() != data.rows() || B.cols() != data.cols())
    throw std::invalid_argument("optimal_intercept: dimension mismatch");
  const auto [mu1, mu2] = class_means(data);
  double proj = ((mu2 - mu1).array() * B.array()).sum();
  if (std::abs(proj) <= 1e-12) throw degenerate_direction_error();

  InterceptResult out;
  out.flipped = proj < 0.0;
  out.b_oriented = out.flipped ? Mat(-B) : B;
  if (out.flipped) proj = -proj;

  const double mean_proj = ((mu1 + mu2).array() * out.b_oriented.array()).sum();
  const double quad = pooled_quadratic_form(data, out.b_oriented);
  const double log_ratio = std::log(static_cast<double>(data.n2()) / data.n1());
  out.beta0_tilde = -0.5 * mean_proj + quad * log_ratio / proj;
  return out;
}

DiscriminantModel finalize_model(const Dataset& data, const SolverResult& fit, double omega,
                                 bool correct_intercept) {
  DiscriminantModel model;
  model.omega = omega;
  const SvdFactors factors = thin_svd(fit.b_hat);
  model.singulars = factors.singulars;
  model.rank = rank_from_singulars(factors.singulars);
  model.diagnostics.iterations = fit.iterations;
  model.diagnostics.converged = fit.converged;
  model.diagnostics.final_objective =
      fit.objective_trace.empty() ? 0.0 : fit.objective_trace.back();
  model.diagnostics.grad_map_norm = fit.final_grad_map_norm;
  model.diagnostics.solver_beta0 = fit.beta0_hat;

  if (!correct_intercept) {
    model.b_hat = fit.b_hat;
    model.beta0_tilde = fit.beta0_hat;
  } else if (model.rank == 0) {
    // Eq.-form intercept is undefined along a null direction; the prior
    // log-odds minimize training error among constant rules.
    model.b_hat = fit.b_hat;
    model.beta0_tilde = std::log(static_cast<double>(data.n2()) / data.n1());
  } else {
    InterceptResult corrected = optimal_intercept(data, fit.b_hat);
    model.b_hat = std::move(corrected.b_oriented);
    model.beta0_tilde = corrected.beta0_tilde;
    model.diagnostics.flipped = corrected.flipped;
  }
  return model;
}

DiscriminantModel fit_matrix_lda(const Dataset& data, const FitConfig& cfg) {
  const Vec y = encode_responses(data);
  const SolverResult fit = fit_penalized(data, y, cfg);
  return finalize_model(data, fit, cfg.omega, true);
}

double score(const DiscriminantModel& model, const Mat& X) {
  if (X.rows() != model.b_hat.rows() || X.cols() != model.b_hat.cols())
    throw std::invalid_argument("score: dimension mismatch");
  return (X.array() * model.b_hat.array()).sum() + model.beta0_tilde;
}

int classify(const DiscriminantModel& model, const Mat& X) {
  return score(model, X) > 0.0 ? 2 : 1;
}

}  // namespace mlda
