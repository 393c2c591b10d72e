#include "mlda/simgen.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "mlda/errors.hpp"

namespace mlda {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void validate(const StudySpec& spec) {
  if (!(spec.pi1 > 0.0 && spec.pi1 < 1.0 && spec.pi2 > 0.0 && spec.pi2 < 1.0))
    throw std::invalid_argument("StudySpec: class weights must lie in (0,1)");
  if (std::abs(spec.pi1 + spec.pi2 - 1.0) > 1e-12)
    throw std::invalid_argument("StudySpec: class weights must sum to 1");
  if (!(std::abs(spec.rho) < 1.0)) throw std::invalid_argument("StudySpec: |rho| must be < 1");
  if (spec.n < 2) throw std::invalid_argument("StudySpec: n must be >= 2");
  if (spec.test_size < 1) throw std::invalid_argument("StudySpec: test_size must be >= 1");
}

Mat ar_correlation(int m, double rho) {
  Mat k(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = std::pow(rho, i - j);
      k(i, j) = v;
      k(j, i) = v;
    }
  return k;
}

}  // namespace

Mat make_signal(const SignalSpec& spec) {
  if (spec.p < 8 || spec.q < 8) throw std::invalid_argument("make_signal: p and q must be >= 8");
  const int p = spec.p, q = spec.q;
  const double amp = spec.amplitude;
  Mat b = Mat::Zero(p, q);
  switch (spec.shape) {
    case Shape::cross: {
      const int r0 = static_cast<int>(0.42 * p), r1 = static_cast<int>(0.58 * p);
      const int c0 = static_cast<int>(0.20 * q), c1 = static_cast<int>(0.80 * q);
      const int rr0 = static_cast<int>(0.20 * p), rr1 = static_cast<int>(0.80 * p);
      const int cc0 = static_cast<int>(0.42 * q), cc1 = static_cast<int>(0.58 * q);
      b.block(r0, c0, r1 - r0, c1 - c0).setConstant(amp);
      b.block(rr0, cc0, rr1 - rr0, cc1 - cc0).setConstant(amp);
      break;
    }
    case Shape::triangle: {
      const double ra = 0.2 * p, rb = 0.8 * p;
      const double mid = 0.5 * q, base_half = 0.3 * q;
      for (int r = static_cast<int>(std::ceil(ra)); r < rb; ++r) {
        const double half = (r - ra) / (rb - ra) * base_half;
        for (int c = static_cast<int>(std::ceil(mid - half)); c < mid + half && c < q; ++c)
          b(r, c) = amp;
      }
      break;
    }
    case Shape::butterfly: {
      const double mid_r = 0.5 * p, mid_c = 0.5 * q, wing = 0.2 * p;
      for (int c = 0; c < q; ++c) {
        const double s = c < mid_c ? (mid_c - c) / mid_c : (c - mid_c + 1) / mid_c;
        const double half = s * wing;
        for (int r = static_cast<int>(std::ceil(mid_r - half)); r < mid_r + half && r < p; ++r)
          b(r, c) = amp;
      }
      break;
    }
  }
  return b;
}

Mat ar_chol(int m, double rho) {
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("ar_chol: |rho| must be < 1");
  if (m < 1) throw std::invalid_argument("ar_chol: m must be >= 1");
  Mat l = Mat::Zero(m, m);
  const double scale = std::sqrt(1.0 - rho * rho);
  for (int i = 0; i < m; ++i) {
    l(i, 0) = std::pow(rho, i);
    for (int j = 1; j <= i; ++j) l(i, j) = std::pow(rho, i - j) * scale;
  }
  return l;
}

std::vector<Mat> sample_class(int count, const Mat& mean, const Mat& Lp, const Mat& Lq, Rng& rng) {
  const Eigen::Index p = mean.rows(), q = mean.cols();
  if (Lp.rows() != p || Lp.cols() != p || Lq.rows() != q || Lq.cols() != q)
    throw std::invalid_argument("sample_class: factor dimensions do not match the mean");
  std::vector<Mat> out;
  out.reserve(std::max(count, 0));
  Mat z(p, q);
  for (int s = 0; s < count; ++s) {
    for (Eigen::Index j = 0; j < q; ++j)
      for (Eigen::Index i = 0; i < p; ++i) z(i, j) = rng.normal();
    Mat x = Lp.triangularView<Eigen::Lower>() * z;
    out.emplace_back(mean + x * Lq.transpose());
  }
  return out;
}

std::pair<Dataset, Dataset> simulate_dataset(const StudySpec& spec, Rng& rng) {
  validate(spec);
  const int n1 = static_cast<int>(std::lround(spec.pi1 * spec.n));
  const int n2 = spec.n - n1;
  if (n1 < 1 || n2 < 1)
    throw degenerate_data_error("simulate_dataset: class split leaves a class empty");

  const Mat b0 = make_signal(spec.signal);
  const Mat kp = ar_correlation(spec.signal.p, spec.rho);
  const Mat kq = ar_correlation(spec.signal.q, spec.rho);
  const Mat m2 = kp * b0 * kq;  // matrix form of Sigma vec(B0)
  const Mat lp = ar_chol(spec.signal.p, spec.rho);
  const Mat lq = ar_chol(spec.signal.q, spec.rho);
  const Mat zero = Mat::Zero(spec.signal.p, spec.signal.q);

  const auto build = [&](int c1, int c2) {
    std::vector<Mat> samples = sample_class(c1, zero, lp, lq, rng);
    std::vector<Mat> cls2 = sample_class(c2, m2, lp, lq, rng);
    samples.insert(samples.end(), std::make_move_iterator(cls2.begin()),
                   std::make_move_iterator(cls2.end()));
    std::vector<int> labels(c1, 1);
    labels.insert(labels.end(), c2, 2);
    return Dataset(std::move(samples), std::move(labels));
  };

  Dataset train = build(n1, n2);
  const int t1 = static_cast<int>(std::lround(spec.pi1 * spec.test_size));
  Dataset test = build(t1, spec.test_size - t1);
  return {std::move(train), std::move(test)};
}

double bayes_error(const StudySpec& spec) {
  validate(spec);
  const Mat b0 = make_signal(spec.signal);
  const Mat kp = ar_correlation(spec.signal.p, spec.rho);
  const Mat kq = ar_correlation(spec.signal.q, spec.rho);
  const double delta_sq = (b0.array() * (kp * b0 * kq).array()).sum();
  if (delta_sq <= 0.0) return std::min(spec.pi1, spec.pi2);
  const double delta = std::sqrt(delta_sq);
  const double shift = std::log(spec.pi2 / spec.pi1) / delta;
  return spec.pi1 * normal_cdf(-0.5 * delta + shift) + spec.pi2 * normal_cdf(-0.5 * delta - shift);
}

EvalReport run_monte_carlo(const StudySpec& spec, const FitConfig& method_cfg, int grid_k,
                           double grid_span, InterceptRule intercept, int threads) {
  validate(spec);
  if (spec.replicates < 1) throw std::invalid_argument("run_monte_carlo: replicates must be >= 1");

  struct RepOut {
    double rate = 0.0;
    int rank = 0;
    double frob = 0.0;
    double omega = 0.0;
    bool ok = false;
  };
  const int reps = spec.replicates;
  std::vector<RepOut> outs(reps);
  const Mat b0 = make_signal(spec.signal);

  const auto one = [&](int r) {
    RepOut& out = outs[r];
    try {
      Rng rng(spec.seed + static_cast<std::uint64_t>(r));
      auto [train, test] = simulate_dataset(spec, rng);
      const Vec grid = omega_grid(train, grid_k, grid_span);
      const PathResult path =
          fit_path(train, method_cfg, grid, intercept == InterceptRule::lda_corrected);
      const DiscriminantModel& model = path.selected().model;
      int errors = 0;
      for (int i = 0; i < test.size(); ++i)
        if (classify(model, test.sample(i)) != test.label(i)) ++errors;
      out.rate = static_cast<double>(errors) / test.size();
      out.rank = model.rank;
      const Mat raw = model.diagnostics.flipped ? Mat(-model.b_hat) : model.b_hat;
      out.frob = (raw - b0).norm();
      out.omega = path.selected().omega;
      out.ok = true;
    } catch (const std::exception&) {
      out.ok = false;
    }
  };

  int t = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  t = std::max(1, std::min(t, reps));
  if (t == 1) {
    for (int r = 0; r < reps; ++r) one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (int w = 0; w < t; ++w)
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) one(r);
      });
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  for (const RepOut& out : outs) {
    if (!out.ok) {
      ++report.failed_replicates;
      continue;
    }
    report.per_replicate_rates.push_back(out.rate);
    report.per_replicate_ranks.push_back(out.rank);
    report.per_replicate_frob.push_back(out.frob);
    report.per_replicate_omegas.push_back(out.omega);
  }
  const std::size_t done = report.per_replicate_rates.size();
  if (done == 0) throw degenerate_data_error("run_monte_carlo: every replicate failed");

  double sum = 0.0;
  for (double r : report.per_replicate_rates) sum += r;
  report.mean_rate = sum / done;
  if (done >= 2) {
    double ss = 0.0;
    for (double r : report.per_replicate_rates) ss += (r - report.mean_rate) * (r - report.mean_rate);
    report.std_error = std::sqrt(ss / (done - 1)) / std::sqrt(static_cast<double>(done));
  } else {
    report.std_error = std::numeric_limits<double>::quiet_NaN();
  }
  double rank_sum = 0.0, frob_sum = 0.0;
  for (int r : report.per_replicate_ranks) rank_sum += r;
  for (double f : report.per_replicate_frob) frob_sum += f;
  report.mean_rank = rank_sum / done;
  report.mean_frob_error = frob_sum / done;
  return report;
}

}  // namespace mlda
