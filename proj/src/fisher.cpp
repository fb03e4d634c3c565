#include "fdx/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <stdexcept>

namespace fdx {

namespace {

constexpr double kRelativeTolerance = 1.0 + 1e-7;

// log(n!) for n = 0..size-1, accumulated in extended precision. Grows on
// demand; readers share the lock, extension takes it exclusively.
class LogFactorials {
 public:
  long double operator()(std::int64_t n) {
    const auto idx = static_cast<std::size_t>(n);
    {
      std::shared_lock lock(mutex_);
      if (idx < table_.size()) return table_[idx];
    }
    std::unique_lock lock(mutex_);
    if (table_.empty()) table_.push_back(0.0L);
    table_.reserve(idx + 1);
    while (table_.size() <= idx) {
      const auto k = static_cast<long double>(table_.size());
      table_.push_back(table_.back() + std::log(k));
    }
    return table_[idx];
  }

 private:
  std::shared_mutex mutex_;
  std::vector<long double> table_;
};

LogFactorials& log_factorials() {
  static LogFactorials table;
  return table;
}

long double log_choose(std::int64_t n, std::int64_t k) {
  auto& lf = log_factorials();
  return lf(n) - lf(k) - lf(n - k);
}

}  // namespace

void FisherMargins::validate() const {
  if (n1 < 0 || n2 < 0 || s < 0) throw std::invalid_argument("Fisher margins must be non-negative");
  if (s > n1 + n2) throw std::invalid_argument("Fisher margins: successes exceed the total sample size");
}

FisherTable FisherTable::from_counts(std::int64_t x1, std::int64_t n1, std::int64_t x2,
                                     std::int64_t n2) {
  if (x1 < 0 || x2 < 0 || n1 < 0 || n2 < 0 || x1 > n1 || x2 > n2) {
    throw std::invalid_argument("counts must satisfy 0 <= x <= n in each group");
  }
  return FisherTable{FisherMargins{n1, n2, x1 + x2}, x1};
}

std::vector<std::pair<std::int64_t, double>> hypergeom_pmf(const FisherMargins& margins) {
  margins.validate();
  const std::int64_t lo = margins.lo();
  const std::int64_t hi = margins.hi();
  const long double log_total = log_choose(margins.n1 + margins.n2, margins.s);
  std::vector<long double> logs;
  logs.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t x = lo; x <= hi; ++x) {
    logs.push_back(log_choose(margins.n1, x) + log_choose(margins.n2, margins.s - x) - log_total);
  }
  const long double peak = *std::max_element(logs.begin(), logs.end());
  long double norm = 0.0L;
  for (auto& v : logs) {
    v = std::exp(v - peak);
    norm += v;
  }
  std::vector<std::pair<std::int64_t, double>> pmf;
  pmf.reserve(logs.size());
  for (std::size_t j = 0; j < logs.size(); ++j) {
    pmf.emplace_back(lo + static_cast<std::int64_t>(j), static_cast<double>(logs[j] / norm));
  }
  return pmf;
}

std::vector<double> fisher_support_pvalues(const FisherMargins& margins, Sided sided) {
  const auto pmf = hypergeom_pmf(margins);
  const std::size_t n = pmf.size();
  std::vector<double> pvals(n);
  if (sided == Sided::One) {
    double tail = 0.0;
    for (std::size_t j = n; j-- > 0;) {
      tail += pmf[j].second;
      pvals[j] = std::min(tail, 1.0);
    }
    return pvals;
  }
  // Accumulate in ascending probability order; every outcome's p-value is the
  // prefix sum up to the last outcome within the tolerance of its own mass.
  std::vector<std::size_t> by_mass(n);
  std::iota(by_mass.begin(), by_mass.end(), std::size_t{0});
  std::stable_sort(by_mass.begin(), by_mass.end(),
                   [&](std::size_t a, std::size_t b) { return pmf[a].second < pmf[b].second; });
  std::vector<double> masses(n);
  std::vector<double> prefix(n);
  double running = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    masses[r] = pmf[by_mass[r]].second;
    running += masses[r];
    prefix[r] = running;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double threshold = pmf[j].second * kRelativeTolerance;
    const auto last = std::upper_bound(masses.begin(), masses.end(), threshold) - masses.begin();
    pvals[j] = std::min(prefix[static_cast<std::size_t>(last) - 1], 1.0);
  }
  return pvals;
}

double fisher_pvalue(const FisherTable& table, Sided sided) {
  const auto& mg = table.margins;
  mg.validate();
  if (table.x < mg.lo() || table.x > mg.hi()) {
    throw std::invalid_argument("Fisher table: x lies outside the hypergeometric support");
  }
  return fisher_support_pvalues(mg, sided)[static_cast<std::size_t>(table.x - mg.lo())];
}

NullCdf fisher_support_cdf(const FisherMargins& margins, Sided sided) {
  const auto pmf = hypergeom_pmf(margins);
  const auto pvals = fisher_support_pvalues(margins, sided);
  const std::size_t n = pmf.size();
  // Same summation order as the p-values themselves: ascending p, then
  // ascending mass (one-sided: descending x), so F(p) reproduces p exactly.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (sided == Sided::One) {
    std::reverse(idx.begin(), idx.end());
  } else {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return pmf[a].second < pmf[b].second; });
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  std::vector<double> support;
  std::vector<double> cum;
  double running = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    running += pmf[idx[r]].second;
    const double p = pvals[idx[r]];
    const double c = std::min(running, 1.0);
    if (!support.empty() && support.back() == p) {
      cum.back() = c;
    } else {
      support.push_back(p);
      cum.push_back(c);
    }
  }
  return NullCdf::step(std::move(support), std::move(cum));
}

}  // namespace fdx
