#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fdx/transforms.hpp"

namespace fdx {

/// tau_1 <= ... <= tau_m with xi_l(tau_l) <= zeta; in the discrete case every
/// tau_l lies in the pooled support or is 0.
struct CriticalValues {
  std::vector<double> tau;
};

struct RejectionResult {
  std::vector<double> adjusted;       // p~_i, input order
  std::size_t ell_hat = 0;            // number of rejections
  std::vector<std::size_t> rejected;  // ascending hypothesis indices
  std::vector<std::size_t> order;     // sigma: indices sorted by p-value (stable)
};

/// tau_l = max{t in A : xi_l(t) <= zeta}, or 0 if no point qualifies.
/// On the continuum the maximum is bracketed by bisection to 1e-12 and the
/// feasible end is returned; on a finite support it is found by galloping
/// from tau_{l-1} and binary search.
CriticalValues critical_values(const TransformFamily& xi, double zeta);

/// Stable ascending order of the p-values, ties broken by index.
std::vector<std::size_t> stable_order(std::span<const double> pvals);

/// p~_i = max over l <= sigma^{-1}(i) of xi_l(p_sigma(l)), the running
/// maximum along the sorted p-values.
std::vector<double> adjusted_pvalues(std::span<const double> pvals, const TransformFamily& xi);

/// Step-down rejection through the adjusted p-values: R = {i : p~_i <= zeta}.
RejectionResult reject(std::span<const double> pvals, const TransformFamily& xi, double zeta);

/// Same rejection set as reject() but stops at the first sorted position whose
/// running maximum exceeds zeta; `adjusted` is left empty.
RejectionResult reject_fast(std::span<const double> pvals, const TransformFamily& xi,
                            double zeta);

/// Direct scan of the step-down definition with explicit critical values:
/// l^ = max{l : p_sigma(l') <= tau_l' for all l' <= l}, R = {i : p_i <= tau_l^}.
RejectionResult stepdown_explicit(std::span<const double> pvals, const CriticalValues& tau);

/// Indices of p-values that are not support points of their own step CDF.
/// Always empty for families without a finite support.
std::vector<std::size_t> off_support(std::span<const double> pvals, const CdfFamily& family);

}  // namespace fdx
