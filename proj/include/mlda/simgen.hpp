#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "mlda/tuning.hpp"

namespace mlda {

enum class Shape { cross, triangle, butterfly };

struct SignalSpec {
  Shape shape = Shape::cross;
  int p = 64;
  int q = 64;
  double amplitude = 0.05;
};

struct StudySpec {
  SignalSpec signal;
  int n = 200;
  double pi1 = 0.5;
  double pi2 = 0.5;
  double rho = 0.5;
  int test_size = 1000;
  int replicates = 100;
  std::uint64_t seed = 0;
};

/// Deterministic random stream: mt19937_64 plus a Marsaglia polar normal
/// sampler, so draws are identical across platforms and thread counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // in [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct EvalReport {
  double mean_rate = 0.0;
  double std_error = 0.0;  // NaN when only one replicate completed
  double mean_rank = 0.0;
  double mean_frob_error = 0.0;
  std::vector<double> per_replicate_rates;
  std::vector<int> per_replicate_ranks;
  std::vector<double> per_replicate_frob;
  std::vector<double> per_replicate_omegas;
  int failed_replicates = 0;
};

/// Deterministic binary-mask image scaled by the amplitude. The cross is the
/// union of a horizontal band rows [0.42p, 0.58p) x cols [0.2q, 0.8q) and its
/// transpose-symmetric vertical band; it has rank 2.
Mat make_signal(const SignalSpec& spec);

/// Closed-form Cholesky factor of the AR(1) correlation matrix rho^|i-j|.
Mat ar_chol(int m, double rho);

/// Draws count samples mean + Lp Z Lq^T with Z iid standard normal, realizing
/// cov(vec X) = (Lq Lq^T) kron (Lp Lp^T).
std::vector<Mat> sample_class(int count, const Mat& mean, const Mat& Lp, const Mat& Lq, Rng& rng);

/// Train/test pair: class-1 mean zero, class-2 mean Kp B0 Kq, deterministic
/// class split n1 = round(pi1 n).
std::pair<Dataset, Dataset> simulate_dataset(const StudySpec& spec, Rng& rng);

/// Closed-form misclassification rate of the Bayes rule for the study's
/// two-Gaussian model, via the Kronecker structure.
double bayes_error(const StudySpec& spec);

enum class InterceptRule { lda_corrected, solver };

/// Per replicate: simulate, tune over an omega grid, evaluate the selected
/// model on the test set. Failed replicates are recorded and excluded.
EvalReport run_monte_carlo(const StudySpec& spec, const FitConfig& method_cfg, int grid_k = 20,
                           double grid_span = 0.01,
                           InterceptRule intercept = InterceptRule::lda_corrected,
                           int threads = 0);

}  // namespace mlda
