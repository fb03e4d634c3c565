#include "fdx/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace fdx {

WeightProfile::WeightProfile(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("weight vector is empty");
  double sum = 0.0;
  for (const double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weights must be finite and non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("at least one weight must be strictly positive");
  const auto m = static_cast<double>(weights_.size());
  mean_ = sum / m;
  sorted_desc_ = weights_;
  std::sort(sorted_desc_.begin(), sorted_desc_.end(), std::greater<>());
  prefix_avg_.resize(weights_.size());
  double running = 0.0;
  for (std::size_t j = 0; j < sorted_desc_.size(); ++j) {
    running += sorted_desc_[j];
    prefix_avg_[j] = running / static_cast<double>(j + 1);
  }
  // the full average is the mean by definition; pin it against summation order
  prefix_avg_.back() = mean_;
}

std::vector<double> weighted_pvalues_am(std::span<const double> p, const WeightProfile& wp) {
  if (p.size() != wp.size()) throw std::invalid_argument("p-values and weights differ in length");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = wp.weights()[i];
    out[i] = w == 0.0 ? 1.0 : std::min(p[i] * wp.mean() / w, 1.0);
  }
  return out;
}

std::vector<double> weighted_pvalues_gm(std::span<const double> p, const WeightProfile& wp) {
  if (p.size() != wp.size()) throw std::invalid_argument("p-values and weights differ in length");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = wp.weights()[i];
    if (p[i] == 0.0) {
      out[i] = 0.0;
    } else if (w == 0.0 || p[i] >= 1.0) {
      out[i] = 1.0;
    } else if (w == wp.mean()) {
      out[i] = p[i];
    } else {
      out[i] = -std::expm1(wp.mean() / w * std::log1p(-p[i]));
    }
  }
  return out;
}

CdfFamily am_family(const WeightProfile& wp) {
  std::vector<NullCdf> cdfs;
  cdfs.reserve(wp.size());
  for (const double w : wp.weights()) cdfs.emplace_back(WeightedAmCdf{w, wp.mean()});
  return CdfFamily(std::move(cdfs));
}

CdfFamily gm_family(const WeightProfile& wp) {
  std::vector<NullCdf> cdfs;
  cdfs.reserve(wp.size());
  for (const double w : wp.weights()) cdfs.emplace_back(WeightedGmCdf{w, wp.mean()});
  return CdfFamily(std::move(cdfs));
}

CriticalValues wlr_am_critical_values(std::size_t m, const AlphaLevel& alpha, double zeta,
                                      const WeightProfile& wp) {
  if (wp.size() != m) throw std::invalid_argument("weight vector size does not match m");
  CriticalValues cv;
  cv.tau.resize(m);
  for (std::size_t ell = 1; ell <= m; ++ell) {
    const std::size_t k = alpha.floor_times(ell) + 1;
    const std::size_t n = m_of_ell(ell, m, alpha);
    const double tau_lr = zeta * static_cast<double>(k) / static_cast<double>(n);
    cv.tau[ell - 1] = tau_lr * wp.mean() / wp.top_mean(n);
  }
  return cv;
}

CriticalValues wgr_gm_critical_values(std::size_t m, const AlphaLevel& alpha, double zeta,
                                      const WeightProfile& wp) {
  if (wp.size() != m) throw std::invalid_argument("weight vector size does not match m");
  CriticalValues cv;
  cv.tau.resize(m);
  for (std::size_t ell = 1; ell <= m; ++ell) {
    const std::size_t k = alpha.floor_times(ell) + 1;
    const std::size_t n = m_of_ell(ell, m, alpha);
    const double tau_gr = binom_tail_invert(n, k, zeta);
    const double exponent = wp.mean() / wp.top_mean(n);
    cv.tau[ell - 1] = -std::expm1(exponent * std::log1p(-tau_gr));
  }
  return cv;
}

std::vector<double> prepare_pvalues(Procedure kind, std::span<const double> p,
                                    const std::vector<double>* weights) {
  if (!needs_weights(kind)) return {p.begin(), p.end()};
  if (weights == nullptr) throw ConfigError(std::string(procedure_name(kind)) + " requires weights");
  const WeightProfile wp(*weights);
  return uses_am_weighting(kind) ? weighted_pvalues_am(p, wp) : weighted_pvalues_gm(p, wp);
}

}  // namespace fdx
