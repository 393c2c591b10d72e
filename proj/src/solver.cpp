#include "mlda/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlda {

void validate(const FitConfig& cfg) {
  if (!(cfg.omega > 0.0)) throw std::invalid_argument("FitConfig: omega must be positive");
  if (!(cfg.rel_tol > 0.0)) throw std::invalid_argument("FitConfig: rel_tol must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("FitConfig: max_iter must be >= 1");
  if (!(cfg.backtrack_factor > 0.0 && cfg.backtrack_factor < 1.0))
    throw std::invalid_argument("FitConfig: backtrack_factor must lie in (0,1)");
}

namespace {

void check_dims(const Dataset& data, const Vec& y, const Mat& B) {
  if (y.size() != data.size())
    throw std::invalid_argument("response length does not match the sample count");
  if (B.rows() != data.rows() || B.cols() != data.cols())
    throw std::invalid_argument("coefficient matrix does not match the sample dimensions");
}

double logistic_term(double margin) {  // log(1 + exp(-margin)), stable
  if (margin >= 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

// y_sign * sigma(-y_sign * f), the negative slope of the logistic term.
double logistic_weight(double y_sign, double f) {
  const double a = y_sign * f;
  if (a >= 0.0) {
    const double e = std::exp(-a);
    return y_sign * e / (1.0 + e);
  }
  return y_sign / (1.0 + std::exp(a));
}

double penalty_value(const Mat& B, Penalty penalty) {
  return penalty == Penalty::nuclear ? nuclear_norm(B) : B.cwiseAbs().sum();
}

}  // namespace

double smooth_loss(const Dataset& data, const Vec& y, double beta0, const Mat& B, Loss loss) {
  check_dims(data, y, B);
  const int n = data.size();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = beta0 + (data.sample(i).array() * B.array()).sum();
    if (loss == Loss::squared) {
      const double r = y(i) - f;
      acc += r * r;
    } else {
      acc += logistic_term((y(i) > 0.0 ? 1.0 : -1.0) * f);
    }
  }
  return loss == Loss::squared ? acc / (2.0 * n) : acc / n;
}

double objective(const Dataset& data, const Vec& y, double beta0, const Mat& B,
                 const FitConfig& cfg) {
  return smooth_loss(data, y, beta0, B, cfg.loss) + cfg.omega * penalty_value(B, cfg.penalty);
}

std::pair<Mat, double> smooth_gradient(const Dataset& data, const Vec& y, double beta0,
                                       const Mat& B, Loss loss) {
  check_dims(data, y, B);
  const int n = data.size();
  Mat grad_b = Mat::Zero(B.rows(), B.cols());
  double grad_beta0 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = beta0 + (data.sample(i).array() * B.array()).sum();
    const double w = loss == Loss::squared ? y(i) - f
                                           : logistic_weight(y(i) > 0.0 ? 1.0 : -1.0, f);
    grad_b.noalias() -= w * data.sample(i);
    grad_beta0 -= w;
  }
  grad_b /= n;
  grad_beta0 /= n;
  return {std::move(grad_b), grad_beta0};
}

namespace detail {

double gram_power_lipschitz(const Mat& design, bool with_intercept) {
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  const Eigen::Index dim = with_intercept ? d + 1 : d;

  // u = G v with G = [1 D]^T [1 D] / n, never forming G.
  const auto apply = [&](const Vec& v, Vec& u) {
    Vec w;
    if (with_intercept) {
      w = design * v.tail(d);
      w.array() += v(0);
      u.resize(dim);
      u(0) = w.sum() / n;
      u.tail(d).noalias() = design.transpose() * w / static_cast<double>(n);
    } else {
      w.noalias() = design * v;
      u.noalias() = design.transpose() * w / static_cast<double>(n);
    }
  };

  Vec v = Vec::Ones(dim) / std::sqrt(static_cast<double>(dim));
  Vec u(dim);
  apply(v, u);
  double lambda = u.norm();
  if (lambda == 0.0) return 0.0;
  for (int it = 0; it < 10000; ++it) {
    v = u / u.norm();
    apply(v, u);
    const double next = u.norm();
    const double change = std::abs(next - lambda);
    lambda = next;
    if (change <= 1e-6 * lambda) break;
    if (lambda == 0.0) return 0.0;
  }
  return 1.01 * lambda;
}

FlatProblem make_flat(const Dataset& data, const Vec& y, Loss loss) {
  if (y.size() != data.size())
    throw std::invalid_argument("response length does not match the sample count");
  if (!y.allFinite()) throw std::invalid_argument("responses contain non-finite values");
  FlatProblem prob;
  prob.design = flatten_design(data);
  prob.y = y;
  prob.p = data.rows();
  prob.q = data.cols();
  prob.loss = loss;
  prob.gram_lipschitz = gram_power_lipschitz(prob.design, true);
  return prob;
}

double flat_smooth_loss(const FlatProblem& prob, double beta0, const Vec& vb) {
  const Eigen::Index n = prob.design.rows();
  Vec f = prob.design * vb;
  f.array() += beta0;
  double acc = 0.0;
  if (prob.loss == Loss::squared) {
    acc = (prob.y - f).squaredNorm() / (2.0 * n);
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      acc += logistic_term((prob.y(i) > 0.0 ? 1.0 : -1.0) * f(i));
    acc /= n;
  }
  return acc;
}

namespace {

// Loss and weight vector from precomputed linear scores f_i = beta0 + <X_i, B>.
double loss_and_weights(const FlatProblem& prob, const Vec& f, Vec& w) {
  const Eigen::Index n = f.size();
  double acc = 0.0;
  if (prob.loss == Loss::squared) {
    w = prob.y - f;
    acc = w.squaredNorm() / (2.0 * n);
  } else {
    w.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ys = prob.y(i) > 0.0 ? 1.0 : -1.0;
      acc += logistic_term(ys * f(i));
      w(i) = logistic_weight(ys, f(i));
    }
    acc /= n;
  }
  return acc;
}

struct ProxOut {
  Vec vb;
  double penalty = 0.0;  // penalty value of vb (unscaled by omega)
};

ProxOut apply_prox(const FlatProblem& prob, const FitConfig& cfg, const Vec& step, double tau) {
  ProxOut out;
  if (cfg.penalty == Penalty::nuclear) {
    Vec shrunk;
    Mat b = svt(unvec(step, prob.p, prob.q), tau, &shrunk);
    out.penalty = shrunk.sum();
    out.vb = vec(b);
  } else {
    Mat b = soft_threshold(unvec(step, prob.p, prob.q), tau);
    out.penalty = b.cwiseAbs().sum();
    out.vb = vec(b);
  }
  return out;
}

}  // namespace

SolverResult fit_flat(const FlatProblem& prob, const FitConfig& cfg, const Mat* init_b,
                      double init_beta0) {
  validate(cfg);
  const Eigen::Index n = prob.design.rows();
  const Eigen::Index d = prob.design.cols();
  if (n < 2) throw std::invalid_argument("fit requires at least two samples");
  if (init_b && (init_b->rows() != prob.p || init_b->cols() != prob.q))
    throw std::invalid_argument("initial point does not match the sample dimensions");

  const double curvature = prob.loss == Loss::logistic ? 0.25 : 1.0;
  double L = prob.gram_lipschitz * curvature;
  if (L <= 0.0) throw std::invalid_argument("degenerate design: zero curvature bound");
  if (cfg.step_rule == StepRule::backtracking) L = std::max(L / 8.0, 1e-12);

  Vec xb = init_b ? Vec(vec(*init_b)) : Vec(Vec::Zero(d));
  double x0 = init_beta0;
  Vec fx = prob.design * xb;  // linear scores of the current iterate, sans beta0
  double pen_x = init_b ? penalty_value(*init_b, cfg.penalty) : 0.0;

  Vec w(n), scores(n);
  scores = fx.array() + x0;
  double F_cur = loss_and_weights(prob, scores, w) + cfg.omega * pen_x;

  SolverResult result;
  result.objective_trace.reserve(cfg.max_iter + 1);
  result.objective_trace.push_back(F_cur);
  if (!std::isfinite(F_cur)) throw divergence_error(0);

  Vec yb = xb;
  double y0 = x0;
  Vec fy = fx;
  double t = 1.0;
  int hits = 0;

  Vec grad_b(d), step(d), fcand(n);

  // One prox-gradient step from (point0, pb, fp); returns the candidate and its
  // smooth loss, growing L under the backtracking rule until the quadratic
  // majorization holds.
  const auto prox_step = [&](double point0, const Vec& pb, const Vec& fp, double& cand0,
                             ProxOut& cand, Vec& fc, double& smooth_cand) {
    scores = fp.array() + point0;
    double smooth_y = loss_and_weights(prob, scores, w);
    double g0 = -w.sum() / static_cast<double>(n);
    grad_b.noalias() = prob.design.transpose() * w;
    grad_b /= -static_cast<double>(n);
    for (;;) {
      step = pb - grad_b / L;
      cand = apply_prox(prob, cfg, step, cfg.omega / L);
      cand0 = point0 - g0 / L;
      fc.noalias() = prob.design * cand.vb;
      scores = fc.array() + cand0;
      smooth_cand = loss_and_weights(prob, scores, w);  // w clobbered; recomputed next call
      if (cfg.step_rule != StepRule::backtracking) break;
      const double db0 = cand0 - point0;
      const double quad = smooth_y + grad_b.dot(cand.vb - pb) + g0 * db0 +
                          0.5 * L * ((cand.vb - pb).squaredNorm() + db0 * db0);
      if (smooth_cand <= quad + 1e-12 * std::max(1.0, std::abs(quad))) break;
      L /= cfg.backtrack_factor;
      scores = fp.array() + point0;
      smooth_y = loss_and_weights(prob, scores, w);
      g0 = -w.sum() / static_cast<double>(n);
      grad_b.noalias() = prob.design.transpose() * w;
      grad_b /= -static_cast<double>(n);
    }
  };

  int iter = 0;
  for (iter = 1; iter <= cfg.max_iter; ++iter) {
    ProxOut cand;
    double cand0 = 0.0, smooth_cand = 0.0;
    prox_step(y0, yb, fy, cand0, cand, fcand, smooth_cand);
    double F_cand = smooth_cand + cfg.omega * cand.penalty;

    if (cfg.restart && !(F_cand <= F_cur)) {
      // Momentum reset: plain prox-gradient step from the current iterate.
      t = 1.0;
      prox_step(x0, xb, fx, cand0, cand, fcand, smooth_cand);
      F_cand = smooth_cand + cfg.omega * cand.penalty;
      if (!std::isfinite(F_cand)) throw divergence_error(iter);
      if (F_cand > F_cur) {
        // Rounding floor: hold the iterate rather than accept an increase.
        cand.vb = xb;
        cand.penalty = pen_x;
        cand0 = x0;
        fcand = fx;
        F_cand = F_cur;
      }
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double theta = (t - 1.0) / t_next;
    yb = cand.vb + theta * (cand.vb - xb);
    y0 = cand0 + theta * (cand0 - x0);
    fy = fcand + theta * (fcand - fx);
    t = t_next;

    const double F_prev = F_cur;
    xb.swap(cand.vb);
    x0 = cand0;
    fx.swap(fcand);
    pen_x = cand.penalty;
    F_cur = F_cand;
    result.objective_trace.push_back(F_cur);
    if (!std::isfinite(F_cur)) throw divergence_error(iter);

    const double rel = std::abs(F_prev - F_cur) / std::max(std::abs(F_prev), 1e-12);
    hits = rel < cfg.rel_tol ? hits + 1 : 0;
    if (hits >= 3) {
      result.converged = true;
      break;
    }
  }
  result.iterations = std::min(iter, cfg.max_iter);

  // Prox-gradient mapping norm at the returned point.
  scores = fx.array() + x0;
  loss_and_weights(prob, scores, w);
  grad_b.noalias() = prob.design.transpose() * w;
  grad_b /= -static_cast<double>(n);
  const double g0 = -w.sum() / static_cast<double>(n);
  step = xb - grad_b / L;
  ProxOut mapped = apply_prox(prob, cfg, step, cfg.omega / L);
  const double d0 = x0 - (x0 - g0 / L);
  result.final_grad_map_norm =
      L * std::sqrt((xb - mapped.vb).squaredNorm() + d0 * d0);

  result.b_hat = unvec(xb, prob.p, prob.q);
  result.beta0_hat = x0;
  return result;
}

}  // namespace detail

double lipschitz_estimate(const Dataset& data, bool with_intercept) {
  if (data.size() < 1) throw std::invalid_argument("lipschitz_estimate: empty dataset");
  return detail::gram_power_lipschitz(flatten_design(data), with_intercept);
}

SolverResult fit_penalized(const Dataset& data, const Vec& y, const FitConfig& cfg) {
  detail::FlatProblem prob = detail::make_flat(data, y, cfg.loss);
  return detail::fit_flat(prob, cfg, nullptr, 0.0);
}

SolverResult fit_penalized(const Dataset& data, const Vec& y, const FitConfig& cfg,
                           const Mat& init_b, double init_beta0) {
  detail::FlatProblem prob = detail::make_flat(data, y, cfg.loss);
  return detail::fit_flat(prob, cfg, &init_b, init_beta0);
}

}  // namespace mlda
