#include "fdx/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/beta.hpp>

namespace fdx {

namespace {

void check_unit(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error(std::string(what) + ": argument " + std::to_string(t) +
                            " outside [0,1]");
  }
}

}  // namespace

StepCdf::StepCdf(std::vector<double> support, std::vector<double> cum)
    : support_(std::move(support)), cum_(std::move(cum)) {
  if (support_.empty() || support_.size() != cum_.size()) {
    throw std::invalid_argument("step CDF: support and cum must be non-empty and equally long");
  }
  for (std::size_t j = 0; j < support_.size(); ++j) {
    if (!(support_[j] >= 0.0 && support_[j] <= 1.0) || !(cum_[j] >= 0.0 && cum_[j] <= 1.0)) {
      throw std::invalid_argument("step CDF: values must lie in [0,1]");
    }
    if (j > 0 && !(support_[j] > support_[j - 1])) {
      throw std::invalid_argument("step CDF: support must be strictly ascending");
    }
    if (j > 0 && cum_[j] < cum_[j - 1]) {
      throw std::invalid_argument("step CDF: cum must be non-decreasing");
    }
  }
}

double StepCdf::operator()(double t) const noexcept {
  // first support point strictly greater than t; everything before it has jumped
  auto it = std::upper_bound(support_.begin(), support_.end(), t);
  if (it == support_.begin()) return 0.0;
  return cum_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

bool StepCdf::contains(double t) const noexcept {
  return std::binary_search(support_.begin(), support_.end(), t);
}

NullCdf::NullCdf(WeightedAmCdf w) : v_(w) {
  if (!(w.weight >= 0.0) || !(w.mean_weight > 0.0)) {
    throw std::invalid_argument("AM-weighted CDF: weight must be >= 0 and mean weight > 0");
  }
}

NullCdf::NullCdf(WeightedGmCdf w) : v_(w) {
  if (!(w.weight >= 0.0) || !(w.mean_weight > 0.0)) {
    throw std::invalid_argument("GM-weighted CDF: weight must be >= 0 and mean weight > 0");
  }
}

double NullCdf::operator()(double t) const noexcept {
  struct Visitor {
    double t;
    double operator()(const UniformCdf&) const { return t; }
    double operator()(const WeightedAmCdf& w) const {
      // min(p * wbar / w, 1) has an atom at 1 whenever w < wbar.
      if (t >= 1.0) return 1.0;
      if (w.weight == 0.0) return 0.0;
      return std::min(w.weight * t / w.mean_weight, 1.0);
    }
    double operator()(const WeightedGmCdf& w) const {
      if (w.weight == 0.0) return t >= 1.0 ? 1.0 : 0.0;
      if (t >= 1.0) return 1.0;
      return -std::expm1(w.weight / w.mean_weight * std::log1p(-t));
    }
    double operator()(const StepCdf& s) const { return s(t); }
  };
  return std::visit(Visitor{t}, v_);
}

double cdf_eval(const NullCdf& cdf, double t) {
  check_unit(t, "cdf_eval");
  return cdf(t);
}

CdfFamily::CdfFamily(std::vector<NullCdf> cdfs) : cdfs_(std::move(cdfs)) {
  if (cdfs_.empty()) throw std::invalid_argument("CDF family must contain at least one CDF");
  const bool all_step =
      std::all_of(cdfs_.begin(), cdfs_.end(), [](const NullCdf& c) { return c.is_step(); });
  if (!all_step) return;
  std::vector<double> pooled;
  for (const auto& c : cdfs_) {
    const auto& s = c.as_step()->support();
    pooled.insert(pooled.end(), s.begin(), s.end());
  }
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
  pooled_support_ = std::move(pooled);
}

CdfFamily CdfFamily::uniform(std::size_t m) {
  return CdfFamily(std::vector<NullCdf>(m, NullCdf::uniform()));
}

void CdfFamily::evaluate(double t, std::vector<double>& out) const {
  out.resize(cdfs_.size());
  for (std::size_t i = 0; i < cdfs_.size(); ++i) out[i] = cdfs_[i](t);
}

void CdfFamily::evaluate_sorted_desc(double t, std::vector<double>& out) const {
  evaluate(t, out);
  std::sort(out.begin(), out.end(), std::greater<>());
}

double binom_tail(std::size_t n, std::size_t k, double t) {
  if (n == 0) throw std::domain_error("binom_tail: n must be positive");
  if (k > n + 1) throw std::domain_error("binom_tail: k must not exceed n + 1");
  check_unit(t, "binom_tail");
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  if (t == 0.0) return 0.0;
  if (t == 1.0) return 1.0;
  // P(Bin[n,t] >= k) = I_t(k, n - k + 1)
  return boost::math::ibeta(static_cast<double>(k), static_cast<double>(n - k + 1), t);
}

double binom_tail_invert(std::size_t n, std::size_t k, double zeta) {
  if (k == 0 || k > n) throw std::domain_error("binom_tail_invert: need 1 <= k <= n");
  if (!(zeta > 0.0 && zeta < 1.0)) throw std::domain_error("binom_tail_invert: zeta must be in (0,1)");
  // tail(0) = 0 <= zeta and tail(1) = 1 > zeta
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (binom_tail(n, k, mid) <= zeta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

namespace detail {

double pbin_tail_unchecked(std::span<const double> probs, std::size_t k) {
  const std::size_t n = probs.size();
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  // mass[j] = P(S = j) for j < k over the Bernoullis folded so far
  std::vector<double> mass(k, 0.0);
  mass[0] = 1.0;
  double tail = 0.0;
  std::size_t reach = 0;  // largest index with possibly non-zero mass
  for (const double p : probs) {
    const double q = 1.0 - p;
    tail += mass[k - 1] * p;
    const std::size_t top = std::min(reach + 1, k - 1);
    for (std::size_t j = top; j > 0; --j) mass[j] = mass[j] * q + mass[j - 1] * p;
    mass[0] *= q;
    reach = top;
  }
  return std::min(tail, 1.0);
}

double tilde_F_unchecked(std::span<const double> sorted_desc, std::size_t j) {
  if (sorted_desc[0] >= 1.0) return 1.0;
  double log_sum = 0.0;
  for (std::size_t i = 0; i < j; ++i) log_sum += std::log1p(-sorted_desc[i]);
  return -std::expm1(log_sum / static_cast<double>(j));
}

}  // namespace detail

double pbin_tail(std::span<const double> probs, std::size_t k) {
  for (const double p : probs) check_unit(p, "pbin_tail");
  return detail::pbin_tail_unchecked(probs, k);
}

double tilde_F(std::span<const double> sorted_desc, std::size_t j) {
  if (j == 0 || j > sorted_desc.size()) {
    throw std::domain_error("tilde_F: need 1 <= j <= length");
  }
  for (std::size_t i = 0; i < sorted_desc.size(); ++i) {
    check_unit(sorted_desc[i], "tilde_F");
    if (i > 0 && sorted_desc[i] > sorted_desc[i - 1]) {
      throw std::domain_error("tilde_F: input must be sorted non-increasingly");
    }
  }
  return detail::tilde_F_unchecked(sorted_desc, j);
}

double top_j_sum(std::span<const double> values, std::size_t j) {
  if (j > values.size()) throw std::domain_error("top_j_sum: j exceeds length");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < j; ++i) sum += sorted[i];
  return sum;
}

}  // namespace fdx
