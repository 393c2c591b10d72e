#pragma once

#include <vector>

#include "mlda/lda.hpp"

namespace mlda {

/// k omegas log-spaced from omega_max down to span * omega_max, where
/// omega_max = ||(1/n) sum (y_i - ybar) X_i||_2 is the smallest omega with a
/// null solution. Throws degenerate_data_error when that norm is zero.
Vec omega_grid(const Dataset& data, int k, double span);

/// n log(rss/n) + log(n) df with df = rank (p + q - rank) + 1.
double bic_score(double rss, int n, int rank, int p, int q);

struct PathEntry {
  double omega = 0.0;
  DiscriminantModel model;
  double rss = 0.0;  // squared loss: sum of squared residuals; logistic: deviance
  double df = 0.0;
  double bic = 0.0;
  bool valid = true;
};

struct PathResult {
  std::vector<PathEntry> entries;  // omegas strictly decreasing
  int selected_index = -1;         // minimal BIC among valid entries, first on ties
  const PathEntry& selected() const { return entries.at(selected_index); }
};

/// Fits every omega in the (strictly decreasing) grid, warm-starting each fit
/// from the previous solution, scores entries by BIC with the solver's
/// intercept, and gives the selected model the corrected intercept.
/// An entry that diverges is marked invalid and excluded from selection.
PathResult fit_path(const Dataset& data, const FitConfig& base_cfg, const Vec& grid,
                    bool correct_selected = true);

}  // namespace mlda
