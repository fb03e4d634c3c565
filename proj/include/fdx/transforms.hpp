#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fdx/distributions.hpp"

namespace fdx {

/// Step-down procedures. The discrete procedures are HLR, PB and HGR
/// supplied with a family of step CDFs.
enum class Procedure {
  LR,
  GR,
  HLR,
  HGR,
  HGR_NONADAPTIVE,
  PB,
  WLR_AM,
  WLR_GM,
  WPB_AM,
  WPB_GM,
  WGR_AM,
  WGR_GM,
};

inline constexpr Procedure kAllProcedures[] = {
    Procedure::LR,     Procedure::GR,     Procedure::HLR,    Procedure::HGR,
    Procedure::HGR_NONADAPTIVE,           Procedure::PB,     Procedure::WLR_AM,
    Procedure::WLR_GM, Procedure::WPB_AM, Procedure::WPB_GM, Procedure::WGR_AM,
    Procedure::WGR_GM,
};

/// CLI spelling: lr, gr, hlr, hgr, hgr-na, pb, wlr-am, ...
std::string_view procedure_name(Procedure kind);
std::optional<Procedure> parse_procedure(std::string_view name);

bool needs_family(Procedure kind);
bool needs_weights(Procedure kind);
/// Weighted kinds that act on arithmetic-mean weighted p-values.
bool uses_am_weighting(Procedure kind);
/// Weighted kinds that act on geometric-mean weighted p-values.
bool uses_gm_weighting(Procedure kind);

/// The FDP exceedance threshold alpha. floor(alpha * l) is the quantity that
/// matters; it is guarded against binary representation artifacts
/// (0.05 * 20 must floor to 1), or exact when alpha is given as a ratio.
class AlphaLevel {
 public:
  AlphaLevel(double value);  // NOLINT(google-explicit-constructor)
  static AlphaLevel rational(std::int64_t numerator, std::int64_t denominator);

  double value() const noexcept { return value_; }
  std::size_t floor_times(std::size_t ell) const noexcept;

 private:
  double value_;
  std::int64_t num_ = 0;
  std::int64_t den_ = 0;
};

/// m(l) = m - l + floor(alpha l) + 1.
std::size_t m_of_ell(std::size_t ell, std::size_t m, const AlphaLevel& alpha);

struct ProcedureSpec {
  Procedure kind = Procedure::LR;
  AlphaLevel alpha = 0.05;
  double zeta = 0.5;
  std::optional<std::vector<double>> weights;  // required for weighted kinds
  CdfFamilyPtr family;                         // required for HLR/HGR/HGR-NA/PB
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The transformation functions xi_1..xi_m of a procedure. For each l,
/// t -> xi_l(t) is non-decreasing and l -> xi_l(t) is non-increasing.
class TransformFamily {
 public:
  std::size_t m() const noexcept { return m_; }
  Procedure kind() const noexcept { return kind_; }
  const AlphaLevel& alpha() const noexcept { return alpha_; }

  /// Pooled support A on which xi is inverted; nullopt means [0,1].
  const std::optional<std::vector<double>>& domain() const noexcept { return domain_; }

  /// xi_l(t), 1 <= l <= m, t in [0,1].
  double operator()(std::size_t ell, double t) const;

  /// xi_l(t) given the F_i(t) already sorted non-increasingly. Only used by
  /// kinds that depend on the family; others ignore `sorted_desc` and use t.
  double eval_sorted(std::size_t ell, double t, std::span<const double> sorted_desc) const;

  /// The sorted F_i(t) vector that eval_sorted expects (empty for kinds
  /// without a family).
  void sorted_values(double t, std::vector<double>& out) const;

  bool uses_family() const noexcept { return family_ != nullptr; }
  const CdfFamilyPtr& family() const noexcept { return family_; }

 private:
  friend TransformFamily make_transform(const ProcedureSpec& spec, std::size_t m);
  TransformFamily() = default;

  Procedure kind_ = Procedure::LR;
  std::size_t m_ = 0;
  AlphaLevel alpha_ = 0.05;
  CdfFamilyPtr family_;
  // wbar_j / wbar for j = 1..m (index j-1); WLR_AM only
  std::vector<double> top_weight_ratio_;
  std::optional<std::vector<double>> domain_;
};

/// Builds the transformation family for `spec` over m hypotheses. Weighted
/// kinds build their AM/GM family from spec.weights; HLR/HGR/PB kinds use
/// spec.family. Throws ConfigError when a required input is missing or has
/// the wrong size.
TransformFamily make_transform(const ProcedureSpec& spec, std::size_t m);

/// True iff a(l, t) <= b(l, t) + slack for every l and every grid point.
bool xi_pointwise_dominates(const TransformFamily& a, const TransformFamily& b,
                            std::span<const double> grid, double slack = 0.0);

}  // namespace fdx
