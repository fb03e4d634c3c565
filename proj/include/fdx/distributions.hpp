#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace fdx {

/// Null CDF of a plain uniform p-value: F(t) = t.
struct UniformCdf {};

/// Null CDF of an arithmetic-mean weighted p-value p * wbar / w:
/// F(t) = min(w * t / wbar, 1) for t < 1 and F(1) = 1.
struct WeightedAmCdf {
  double weight;
  double mean_weight;
};

/// Null CDF of a geometric-mean weighted p-value 1 - (1 - p)^(wbar / w):
/// F(t) = 1 - (1 - t)^(w / wbar).
struct WeightedGmCdf {
  double weight;
  double mean_weight;
};

/// Right-continuous step function that jumps only at `support` points.
/// F(t) = cum[j] for support[j] <= t < support[j+1], and 0 below support[0].
class StepCdf {
 public:
  /// Throws std::invalid_argument unless support is strictly ascending in
  /// [0,1] and cum is non-decreasing in [0,1] with matching length.
  StepCdf(std::vector<double> support, std::vector<double> cum);

  double operator()(double t) const noexcept;

  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& cum() const noexcept { return cum_; }

  bool contains(double t) const noexcept;

  friend bool operator==(const StepCdf&, const StepCdf&) = default;

 private:
  std::vector<double> support_;
  std::vector<double> cum_;
};

/// One hypothesis's (maximum) null distribution function F_i.
///
/// A weight of zero is allowed for both weighted variants: the CDF is then
/// 0 on [0,1) and 1 at t = 1, the limit of the parametric formulas.
class NullCdf {
 public:
  using Variant = std::variant<UniformCdf, WeightedAmCdf, WeightedGmCdf, StepCdf>;

  NullCdf() : v_(UniformCdf{}) {}
  NullCdf(UniformCdf u) : v_(u) {}
  NullCdf(WeightedAmCdf w);
  NullCdf(WeightedGmCdf w);
  NullCdf(StepCdf s) : v_(std::move(s)) {}

  static NullCdf uniform() { return NullCdf{UniformCdf{}}; }
  static NullCdf step(std::vector<double> support, std::vector<double> cum) {
    return NullCdf{StepCdf(std::move(support), std::move(cum))};
  }

  /// Evaluate without domain checking; t is assumed to be in [0,1].
  double operator()(double t) const noexcept;

  bool is_step() const noexcept { return std::holds_alternative<StepCdf>(v_); }
  const StepCdf* as_step() const noexcept { return std::get_if<StepCdf>(&v_); }
  const Variant& variant() const noexcept { return v_; }

 private:
  Variant v_;
};

/// F(t) for t in [0,1]; throws std::domain_error otherwise.
double cdf_eval(const NullCdf& cdf, double t);

/// The family F_1..F_m of a testing problem together with its pooled
/// support A (the union of the step supports) when every member is a step
/// function. Mixed or continuous families have no finite support.
class CdfFamily {
 public:
  explicit CdfFamily(std::vector<NullCdf> cdfs);

  static CdfFamily uniform(std::size_t m);

  std::size_t size() const noexcept { return cdfs_.size(); }
  const NullCdf& operator[](std::size_t i) const noexcept { return cdfs_[i]; }
  const std::vector<NullCdf>& cdfs() const noexcept { return cdfs_; }

  bool is_discrete() const noexcept { return pooled_support_.has_value(); }
  /// Sorted, deduplicated union of all step supports; nullopt for the continuum.
  const std::optional<std::vector<double>>& pooled_support() const noexcept {
    return pooled_support_;
  }

  /// Writes F_i(t) for every member into `out` (resized to m).
  void evaluate(double t, std::vector<double>& out) const;
  /// F_i(t) for every member, sorted non-increasingly.
  void evaluate_sorted_desc(double t, std::vector<double>& out) const;

 private:
  std::vector<NullCdf> cdfs_;
  std::optional<std::vector<double>> pooled_support_;
};

using CdfFamilyPtr = std::shared_ptr<const CdfFamily>;

/// P(Bin[n, t] >= k). Requires n >= 1, k <= n + 1, t in [0,1].
double binom_tail(std::size_t n, std::size_t k, double t);

/// Largest t in [0,1] with binom_tail(n, k, t) <= zeta, found by bisection to
/// 1e-12 and rounded to the feasible side. Requires 1 <= k <= n, zeta in (0,1).
double binom_tail_invert(std::size_t n, std::size_t k, double zeta);

/// P(PBin[probs] >= k), the upper tail of a sum of independent Bernoulli
/// variables. O(n * min(n, k)) in the probability domain; the mass that
/// reaches k is absorbed into an exact tail accumulator.
double pbin_tail(std::span<const double> probs, std::size_t k);

/// 1 - (prod_{j' <= j} (1 - F_(j')))^(1/j) over the first j entries of a
/// non-increasing sequence, computed through the mean of log(1 - F).
double tilde_F(std::span<const double> sorted_desc, std::size_t j);

/// Sum of the j largest entries.
double top_j_sum(std::span<const double> values, std::size_t j);

namespace detail {
// Unchecked kernels shared with the transform evaluators.
double pbin_tail_unchecked(std::span<const double> probs, std::size_t k);
double tilde_F_unchecked(std::span<const double> sorted_desc, std::size_t j);
}  // namespace detail

}  // namespace fdx
