#include "fdx/stepdown.hpp"

#include <algorithm>
#include <numeric>

namespace fdx {

namespace {

// Evaluates xi_l at a sequence of points, reusing the sorted-F buffer.
class PointEvaluator {
 public:
  PointEvaluator(const TransformFamily& xi, std::size_t ell) : xi_(xi), ell_(ell) {}

  double operator()(double t) {
    xi_.sorted_values(t, buffer_);
    return xi_.eval_sorted(ell_, t, buffer_);
  }

 private:
  const TransformFamily& xi_;
  std::size_t ell_;
  std::vector<double> buffer_;
};

double invert_on_continuum(PointEvaluator& xi, double zeta, double lower_hint) {
  double lo = lower_hint;
  if (xi(lo) > zeta) {
    lo = 0.0;
    if (xi(lo) > zeta) return 0.0;
  }
  double hi = 1.0;
  if (xi(hi) <= zeta) return 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (xi(mid) <= zeta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

// Largest index i with xi(support[i]) <= zeta, or -1 if none; `hint` is an
// index believed feasible (the previous critical value) or -1.
std::ptrdiff_t invert_on_support(PointEvaluator& xi, double zeta,
                                 const std::vector<double>& support, std::ptrdiff_t hint) {
  const auto n = static_cast<std::ptrdiff_t>(support.size());
  auto feasible = [&](std::ptrdiff_t i) { return xi(support[static_cast<std::size_t>(i)]) <= zeta; };

  std::ptrdiff_t lo = -1;  // known feasible (or the empty sentinel)
  std::ptrdiff_t hi = n;   // known infeasible (or one past the end)
  if (hint >= 0 && feasible(hint)) {
    lo = hint;
    std::ptrdiff_t step = 1;
    while (lo + step < n && feasible(lo + step)) {
      lo += step;
      step *= 2;
    }
    hi = std::min(lo + step, n);
  } else if (hint >= 0) {
    hi = hint;
  }
  while (hi - lo > 1) {
    const std::ptrdiff_t mid = lo + (hi - lo) / 2;
    if (feasible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

CriticalValues critical_values(const TransformFamily& xi, double zeta) {
  CriticalValues out;
  out.tau.resize(xi.m());
  const auto& domain = xi.domain();
  std::ptrdiff_t prev_index = -1;
  double prev_tau = 0.0;
  for (std::size_t ell = 1; ell <= xi.m(); ++ell) {
    PointEvaluator eval(xi, ell);
    if (domain) {
      prev_index = invert_on_support(eval, zeta, *domain, prev_index);
      prev_tau = prev_index < 0 ? 0.0 : (*domain)[static_cast<std::size_t>(prev_index)];
    } else {
      prev_tau = invert_on_continuum(eval, zeta, prev_tau);
    }
    out.tau[ell - 1] = prev_tau;
  }
  return out;
}

std::vector<std::size_t> stable_order(std::span<const double> pvals) {
  std::vector<std::size_t> order(pvals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  return order;
}

namespace {

// Walks the sorted p-values one tie group at a time. Equal p-values share
// the maximum of xi over their whole group, so the result does not depend on
// how ties are ordered. `visit(first, last, running_max)` returns false to stop.
template <typename Visit>
void sweep_groups(std::span<const double> pvals, const TransformFamily& xi,
                  const std::vector<std::size_t>& order, Visit&& visit) {
  std::vector<double> sorted_f;
  double running = 0.0;
  std::size_t pos = 0;
  const std::size_t m = order.size();
  while (pos < m) {
    const double p = pvals[order[pos]];
    std::size_t end = pos + 1;
    while (end < m && pvals[order[end]] == p) ++end;
    xi.sorted_values(p, sorted_f);
    for (std::size_t j = pos; j < end; ++j) running = std::max(running, xi.eval_sorted(j + 1, p, sorted_f));
    if (!visit(pos, end, running)) return;
    pos = end;
  }
}

}  // namespace

std::vector<double> adjusted_pvalues(std::span<const double> pvals, const TransformFamily& xi) {
  if (pvals.size() != xi.m()) throw ConfigError("number of p-values does not match the transform family");
  const auto order = stable_order(pvals);
  std::vector<double> adjusted(pvals.size());
  sweep_groups(pvals, xi, order, [&](std::size_t first, std::size_t last, double running) {
    for (std::size_t j = first; j < last; ++j) adjusted[order[j]] = running;
    return true;
  });
  return adjusted;
}

RejectionResult reject(std::span<const double> pvals, const TransformFamily& xi, double zeta) {
  RejectionResult r;
  r.adjusted = adjusted_pvalues(pvals, xi);
  r.order = stable_order(pvals);
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    if (r.adjusted[i] <= zeta) r.rejected.push_back(i);
  }
  r.ell_hat = r.rejected.size();
  return r;
}

RejectionResult reject_fast(std::span<const double> pvals, const TransformFamily& xi,
                            double zeta) {
  if (pvals.size() != xi.m()) throw ConfigError("number of p-values does not match the transform family");
  RejectionResult r;
  r.order = stable_order(pvals);
  sweep_groups(pvals, xi, r.order, [&](std::size_t, std::size_t last, double running) {
    if (running > zeta) return false;
    r.ell_hat = last;
    return true;
  });
  r.rejected.assign(r.order.begin(), r.order.begin() + static_cast<std::ptrdiff_t>(r.ell_hat));
  std::sort(r.rejected.begin(), r.rejected.end());
  return r;
}

RejectionResult stepdown_explicit(std::span<const double> pvals, const CriticalValues& tau) {
  if (pvals.size() != tau.tau.size()) throw ConfigError("number of p-values does not match the critical values");
  RejectionResult r;
  r.order = stable_order(pvals);
  std::size_t ell_hat = 0;
  while (ell_hat < pvals.size() && pvals[r.order[ell_hat]] <= tau.tau[ell_hat]) ++ell_hat;
  r.ell_hat = ell_hat;
  if (ell_hat > 0) {
    const double threshold = tau.tau[ell_hat - 1];
    for (std::size_t i = 0; i < pvals.size(); ++i) {
      if (pvals[i] <= threshold) r.rejected.push_back(i);
    }
  }
  return r;
}

std::vector<std::size_t> off_support(std::span<const double> pvals, const CdfFamily& family) {
  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < pvals.size() && i < family.size(); ++i) {
    if (const auto* step = family[i].as_step(); step && !step->contains(pvals[i])) flagged.push_back(i);
  }
  return flagged;
}

}  // namespace fdx
