#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fdx/distributions.hpp"
#include "fdx/stepdown.hpp"
#include "fdx/transforms.hpp"

namespace fdx {

/// Summary statistics of a fixed, externally supplied weight vector.
class WeightProfile {
 public:
  /// Throws std::invalid_argument for an empty vector, a negative or
  /// non-finite weight, or an all-zero vector.
  explicit WeightProfile(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double mean() const noexcept { return mean_; }
  /// w_(1) >= ... >= w_(m)
  const std::vector<double>& sorted_desc() const noexcept { return sorted_desc_; }
  /// Mean of the j largest weights, 1 <= j <= m.
  double top_mean(std::size_t j) const { return prefix_avg_.at(j - 1); }
  const std::vector<double>& prefix_avg() const noexcept { return prefix_avg_; }

 private:
  std::vector<double> weights_;
  double mean_ = 0.0;
  std::vector<double> sorted_desc_;
  std::vector<double> prefix_avg_;
};

/// min(p_i * wbar / w_i, 1); zero weights map to 1.
std::vector<double> weighted_pvalues_am(std::span<const double> p, const WeightProfile& wp);

/// 1 - (1 - p_i)^(wbar / w_i); zero weights map to 1, or to 0 when p_i = 0.
std::vector<double> weighted_pvalues_gm(std::span<const double> p, const WeightProfile& wp);

/// The null CDFs F^AM_i / F^GM_i of the weighted p-values.
CdfFamily am_family(const WeightProfile& wp);
CdfFamily gm_family(const WeightProfile& wp);

/// tau^LR_l * wbar / wbar_{m(l)}.
CriticalValues wlr_am_critical_values(std::size_t m, const AlphaLevel& alpha, double zeta,
                                      const WeightProfile& wp);

/// 1 - (1 - tau^GR_l)^(wbar / wbar_{m(l)}).
CriticalValues wgr_gm_critical_values(std::size_t m, const AlphaLevel& alpha, double zeta,
                                      const WeightProfile& wp);

/// The raw p-values transformed as the weighted kind expects (AM or GM);
/// other kinds get the input back unchanged.
std::vector<double> prepare_pvalues(Procedure kind, std::span<const double> p,
                                    const std::vector<double>* weights);

}  // namespace fdx
