#include "fdx/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "fdx/weighting.hpp"

namespace fdx {

namespace {

constexpr std::array<std::pair<Procedure, std::string_view>, 12> kNames{{
    {Procedure::LR, "lr"},
    {Procedure::GR, "gr"},
    {Procedure::HLR, "hlr"},
    {Procedure::HGR, "hgr"},
    {Procedure::HGR_NONADAPTIVE, "hgr-na"},
    {Procedure::PB, "pb"},
    {Procedure::WLR_AM, "wlr-am"},
    {Procedure::WLR_GM, "wlr-gm"},
    {Procedure::WPB_AM, "wpb-am"},
    {Procedure::WPB_GM, "wpb-gm"},
    {Procedure::WGR_AM, "wgr-am"},
    {Procedure::WGR_GM, "wgr-gm"},
}};

// How xi_l consumes the sorted F_i(t).
enum class Device { Linear, Binomial, Markov, PoissonBinomial, GeometricBinomial, NonAdaptive };

Device device_of(Procedure kind) {
  switch (kind) {
    case Procedure::LR:
    case Procedure::WLR_AM:
      return Device::Linear;
    case Procedure::GR:
      return Device::Binomial;
    case Procedure::HLR:
    case Procedure::WLR_GM:
      return Device::Markov;
    case Procedure::PB:
    case Procedure::WPB_AM:
    case Procedure::WPB_GM:
      return Device::PoissonBinomial;
    case Procedure::HGR:
    case Procedure::WGR_AM:
    case Procedure::WGR_GM:
      return Device::GeometricBinomial;
    case Procedure::HGR_NONADAPTIVE:
      return Device::NonAdaptive;
  }
  return Device::Linear;
}

}  // namespace

std::string_view procedure_name(Procedure kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<Procedure> parse_procedure(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool needs_family(Procedure kind) {
  return kind == Procedure::HLR || kind == Procedure::HGR ||
         kind == Procedure::HGR_NONADAPTIVE || kind == Procedure::PB;
}

bool uses_am_weighting(Procedure kind) {
  return kind == Procedure::WLR_AM || kind == Procedure::WPB_AM || kind == Procedure::WGR_AM;
}

bool uses_gm_weighting(Procedure kind) {
  return kind == Procedure::WLR_GM || kind == Procedure::WPB_GM || kind == Procedure::WGR_GM;
}

bool needs_weights(Procedure kind) { return uses_am_weighting(kind) || uses_gm_weighting(kind); }

AlphaLevel::AlphaLevel(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) throw ConfigError("alpha must lie in (0,1)");
}

AlphaLevel AlphaLevel::rational(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0 || numerator <= 0 || numerator >= denominator) {
    throw ConfigError("alpha ratio must satisfy 0 < numerator < denominator");
  }
  AlphaLevel a(static_cast<double>(numerator) / static_cast<double>(denominator));
  a.num_ = numerator;
  a.den_ = denominator;
  return a;
}

std::size_t AlphaLevel::floor_times(std::size_t ell) const noexcept {
  if (den_ > 0) {
    return static_cast<std::size_t>(static_cast<std::int64_t>(ell) * num_ / den_);
  }
  return static_cast<std::size_t>(std::floor(value_ * static_cast<double>(ell) + 1e-9));
}

std::size_t m_of_ell(std::size_t ell, std::size_t m, const AlphaLevel& alpha) {
  return m - ell + alpha.floor_times(ell) + 1;
}

TransformFamily make_transform(const ProcedureSpec& spec, std::size_t m) {
  if (m == 0) throw ConfigError("a procedure needs at least one hypothesis");
  if (!(spec.zeta > 0.0 && spec.zeta < 1.0)) throw ConfigError("zeta must lie in (0,1)");

  TransformFamily xi;
  xi.kind_ = spec.kind;
  xi.m_ = m;
  xi.alpha_ = spec.alpha;

  if (needs_family(spec.kind)) {
    if (!spec.family) {
      throw ConfigError(std::string(procedure_name(spec.kind)) + " requires a CDF family");
    }
    if (spec.family->size() != m) {
      throw ConfigError("CDF family size does not match the number of p-values");
    }
    xi.family_ = spec.family;
    xi.domain_ = spec.family->pooled_support();
  } else if (needs_weights(spec.kind)) {
    if (!spec.weights) {
      throw ConfigError(std::string(procedure_name(spec.kind)) + " requires weights");
    }
    if (spec.weights->size() != m) {
      throw ConfigError("weight vector size does not match the number of p-values");
    }
    WeightProfile wp(*spec.weights);
    if (spec.kind == Procedure::WLR_AM) {
      xi.top_weight_ratio_.resize(m);
      for (std::size_t j = 1; j <= m; ++j) xi.top_weight_ratio_[j - 1] = wp.top_mean(j) / wp.mean();
    } else if (uses_am_weighting(spec.kind)) {
      xi.family_ = std::make_shared<const CdfFamily>(am_family(wp));
    } else {
      xi.family_ = std::make_shared<const CdfFamily>(gm_family(wp));
    }
  }
  return xi;
}

void TransformFamily::sorted_values(double t, std::vector<double>& out) const {
  if (!family_) {
    out.clear();
    return;
  }
  if (device_of(kind_) == Device::NonAdaptive) {
    // order is irrelevant for the all-m geometric mean
    family_->evaluate(t, out);
  } else {
    family_->evaluate_sorted_desc(t, out);
  }
}

double TransformFamily::operator()(std::size_t ell, double t) const {
  std::vector<double> sorted;
  sorted_values(t, sorted);
  return eval_sorted(ell, t, sorted);
}

double TransformFamily::eval_sorted(std::size_t ell, double t,
                                    std::span<const double> sorted_desc) const {
  const std::size_t k = alpha_.floor_times(ell) + 1;
  const std::size_t n = m_ - ell + k;
  switch (device_of(kind_)) {
    case Device::Linear: {
      const double scale = kind_ == Procedure::WLR_AM ? top_weight_ratio_[n - 1] : 1.0;
      return static_cast<double>(n) / static_cast<double>(k) * scale * t;
    }
    case Device::Binomial:
      return binom_tail(n, k, t);
    case Device::Markov: {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += sorted_desc[j];
      return sum / static_cast<double>(k);
    }
    case Device::PoissonBinomial:
      return detail::pbin_tail_unchecked(sorted_desc.first(n), k);
    case Device::GeometricBinomial:
      return binom_tail(n, k, detail::tilde_F_unchecked(sorted_desc, n));
    case Device::NonAdaptive: {
      if (std::any_of(sorted_desc.begin(), sorted_desc.end(), [](double f) { return f >= 1.0; })) {
        return 1.0;
      }
      double log_sum = 0.0;
      for (const double f : sorted_desc) log_sum += std::log1p(-f);
      const double f_tilde = -std::expm1(log_sum / static_cast<double>(m_));
      return binom_tail(m_, k, f_tilde);
    }
  }
  return 0.0;
}

bool xi_pointwise_dominates(const TransformFamily& a, const TransformFamily& b,
                            std::span<const double> grid, double slack) {
  if (a.m() != b.m()) throw ConfigError("transform families have different m");
  std::vector<double> fa;
  std::vector<double> fb;
  for (const double t : grid) {
    a.sorted_values(t, fa);
    b.sorted_values(t, fb);
    for (std::size_t ell = 1; ell <= a.m(); ++ell) {
      if (a.eval_sorted(ell, t, fa) > b.eval_sorted(ell, t, fb) + slack) return false;
    }
  }
  return true;
}

}  // namespace fdx
