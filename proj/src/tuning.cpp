#include "mlda/tuning.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "mlda/errors.hpp"

namespace mlda {

Vec omega_grid(const Dataset& data, int k, double span) {
  if (k < 2) throw std::invalid_argument("omega_grid: k must be >= 2");
  if (!(span > 0.0 && span < 1.0)) throw std::invalid_argument("omega_grid: span must be in (0,1)");
  const Vec y = encode_responses(data);
  const double ybar = y.mean();
  Mat corr = Mat::Zero(data.rows(), data.cols());
  for (int i = 0; i < data.size(); ++i) corr.noalias() += (y(i) - ybar) * data.sample(i);
  corr /= data.size();
  const double top = spectral_norm(corr);
  if (top <= 0.0)
    throw degenerate_data_error("omega_grid: the response/covariate correlation vanishes");
  // Hair above the computed norm so the top of the grid provably nulls the fit
  // despite the power-iteration tolerance.
  const double omega_max = top * (1.0 + 1e-9);
  Vec grid(k);
  for (int i = 0; i < k; ++i) grid(i) = omega_max * std::pow(span, i / (k - 1.0));
  return grid;
}

double bic_score(double rss, int n, int rank, int p, int q) {
  if (!(rss > 0.0)) throw std::invalid_argument("bic_score: rss must be positive");
  if (n <= 0) throw std::invalid_argument("bic_score: n must be positive");
  if (rank < 0 || rank > std::min(p, q)) throw std::invalid_argument("bic_score: rank out of range");
  const double df = static_cast<double>(rank) * (p + q - rank) + 1.0;
  return n * std::log(rss / n) + std::log(static_cast<double>(n)) * df;
}

PathResult fit_path(const Dataset& data, const FitConfig& base_cfg, const Vec& grid,
                    bool correct_selected) {
  if (grid.size() == 0) throw std::invalid_argument("fit_path: empty grid");
  for (Eigen::Index i = 1; i < grid.size(); ++i)
    if (!(grid(i) < grid(i - 1)))
      throw std::invalid_argument("fit_path: grid must be strictly decreasing");

  const Vec y = encode_responses(data);
  const detail::FlatProblem prob = detail::make_flat(data, y, base_cfg.loss);
  const int n = data.size();
  const int p = static_cast<int>(data.rows());
  const int q = static_cast<int>(data.cols());

  PathResult path;
  path.entries.reserve(grid.size());
  std::vector<SolverResult> fits(grid.size());
  std::optional<Mat> warm_b;
  double warm_beta0 = 0.0;
  std::optional<divergence_error> last_divergence;

  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    FitConfig cfg = base_cfg;
    cfg.omega = grid(i);
    PathEntry entry;
    entry.omega = grid(i);
    try {
      fits[i] = detail::fit_flat(prob, cfg, warm_b ? &*warm_b : nullptr, warm_beta0);
      entry.model = finalize_model(data, fits[i], grid(i), false);
      Vec resid = y - prob.design * vec(fits[i].b_hat);
      resid.array() -= fits[i].beta0_hat;
      if (base_cfg.loss == Loss::squared) {
        entry.rss = resid.squaredNorm();
        entry.bic = bic_score(entry.rss, n, entry.model.rank, p, q);
      } else {
        entry.rss = 2.0 * n * detail::flat_smooth_loss(prob, fits[i].beta0_hat,
                                                       vec(fits[i].b_hat));
        entry.bic = entry.rss +
                    std::log(static_cast<double>(n)) *
                        (static_cast<double>(entry.model.rank) * (p + q - entry.model.rank) + 1.0);
      }
      entry.df = static_cast<double>(entry.model.rank) * (p + q - entry.model.rank) + 1.0;
      warm_b = fits[i].b_hat;
      warm_beta0 = fits[i].beta0_hat;
    } catch (const divergence_error& e) {
      entry.valid = false;
      last_divergence = e;
    } catch (const std::invalid_argument&) {
      entry.valid = false;
    }
    path.entries.push_back(std::move(entry));
  }

  for (std::size_t i = 0; i < path.entries.size(); ++i) {
    const auto& e = path.entries[i];
    if (!e.valid) continue;
    if (path.selected_index < 0 || e.bic < path.entries[path.selected_index].bic)
      path.selected_index = static_cast<int>(i);
  }
  if (path.selected_index < 0) {
    if (last_divergence) throw *last_divergence;
    throw degenerate_data_error("fit_path: no valid path entry");
  }

  if (correct_selected) {
    const int s = path.selected_index;
    path.entries[s].model =
        finalize_model(data, fits[s], path.entries[s].omega, true);
  }
  return path;
}

}  // namespace mlda
