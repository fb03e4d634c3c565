#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fdx/distributions.hpp"

namespace fdx {

/// Margins of a 2x2 table: group sizes n1, n2 and total successes s. The
/// conditional null law of the group-1 success count is hypergeometric on
/// [max(0, s - n2), min(n1, s)].
struct FisherMargins {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  std::int64_t s = 0;

  /// Throws std::invalid_argument for negative counts or s > n1 + n2.
  void validate() const;
  std::int64_t lo() const noexcept { return s > n2 ? s - n2 : 0; }
  std::int64_t hi() const noexcept { return s < n1 ? s : n1; }

  friend bool operator==(const FisherMargins&, const FisherMargins&) = default;
};

struct FisherTable {
  FisherMargins margins;
  std::int64_t x = 0;  // group-1 successes

  /// Table with x1 of n1 successes in group 1 and x2 of n2 in group 2.
  static FisherTable from_counts(std::int64_t x1, std::int64_t n1, std::int64_t x2, std::int64_t n2);
};

enum class Sided { One, Two };

/// (x, P(X = x)) over the hypergeometric support, ascending in x.
std::vector<std::pair<std::int64_t, double>> hypergeom_pmf(const FisherMargins& margins);

/// Fisher's exact test. Two-sided: total probability of the tables no more
/// likely than the observed one, with a 1 + 1e-7 relative tolerance on the
/// comparison. One-sided: upper tail P(X >= x).
double fisher_pvalue(const FisherTable& table, Sided sided);

/// The step CDF F(t) = P(p-value <= t) of the test's p-value under the
/// conditional null. Its support points are exactly the attainable
/// p-values, bit-identical to what fisher_pvalue returns.
NullCdf fisher_support_cdf(const FisherMargins& margins, Sided sided);

/// p-value of every outcome in the support, ascending in x.
std::vector<double> fisher_support_pvalues(const FisherMargins& margins, Sided sided);

}  // namespace fdx
