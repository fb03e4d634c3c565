#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fdx/fisher.hpp"
#include "fdx/transforms.hpp"

namespace fdx {

/// Two-sample binary-response study: m positions, N subjects per group.
/// Positions [0, m1) are null with success probability p_null_low in both
/// groups, [m1, m1 + m2) null with p_null_high, and the last m3 positions are
/// alternatives with p_alt_base in group 1 and q3 in group 2.
struct SimConfig {
  std::size_t m = 800;
  std::size_t m1 = 144;
  std::size_t m2 = 576;
  std::size_t m3 = 80;
  double q3 = 0.4;
  double p_null_low = 0.01;
  double p_null_high = 0.10;
  double p_alt_base = 0.10;
  std::int64_t N = 25;
  AlphaLevel alpha = 0.05;
  double zeta = 0.5;
  std::size_t replicates = 200;
  std::uint64_t seed = 20200101;
  Sided sided = Sided::Two;
  unsigned threads = 1;

  /// Throws ConfigError when the counts do not add up or a probability is
  /// outside (0,1).
  void validate() const;
};

/// A procedure column of the study. BH is the plain step-up benchmark at
/// level alpha on the raw p-values; everything else is a step-down kind that
/// receives the replicate's Fisher step CDFs when `discrete` is set.
struct SimProcedure {
  std::string label;
  std::optional<Procedure> kind;  // nullopt: BH
  bool discrete = false;

  static SimProcedure bh() { return {"BH", std::nullopt, false}; }
};

/// bh, lr, gr, dlr, dpb, dgr, dgr-na
std::optional<SimProcedure> parse_sim_procedure(std::string_view name);
std::vector<SimProcedure> table2_procedures();

struct TrialOutcome {
  double fdp = 0.0;
  double tdp = 0.0;
  std::size_t rejections = 0;
};

struct TrialRecord {
  std::size_t replicate = 0;
  std::vector<TrialOutcome> outcomes;  // one per procedure
};

struct ProcedureSummary {
  std::string label;
  double mean_tdp = 0.0;
  double se_tdp = 0.0;
  double fdx = 0.0;  // empirical P(FDP > alpha)
  double fdx_se = 0.0;
  double mean_rejections = 0.0;
};

struct ScenarioResult {
  SimConfig config;
  std::vector<ProcedureSummary> summaries;
  std::vector<TrialRecord> trials;
};

/// Independent engine for replicate r of a run seeded with `seed`; serial and
/// parallel executions draw identical streams.
std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t replicate);

/// Runs `task(r)` for r in [0, count) on `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

/// Indices rejected by the Benjamini-Hochberg step-up at level alpha.
std::vector<std::size_t> bh_rejections(std::span<const double> pvals, double alpha);

/// `progress` receives the number of finished replicates; calls are serialized.
ScenarioResult run_scenario(const SimConfig& config, const std::vector<SimProcedure>& procedures,
                            const std::function<void(std::size_t)>& progress = {});

/// The 54 configurations of the full study (m in {800, 2000}; m3 at 10/30/80%
/// of m; m1 at 20/50/80% of the nulls; q3 in {0.15, 0.25, 0.4}), each
/// inheriting the remaining fields from `base`.
std::vector<SimConfig> table2_configurations(const SimConfig& base);

// Monte-Carlo FDX oracle --------------------------------------------------

/// One draw of a model with known truth. `family` holds the null CDFs of the
/// draw (required by the family-based kinds); weighted kinds ignore it and
/// weight the raw p-values themselves.
struct ModelDraw {
  std::vector<double> pvalues;
  std::vector<bool> is_null;
  CdfFamilyPtr family;
};

using NullModel = std::function<ModelDraw(std::mt19937_64&)>;

struct FdxEstimate {
  double exceedance = 0.0;
  double se = 0.0;
  std::size_t exceed_count = 0;
  std::size_t replicates = 0;
};

/// Fraction of replicates with FDP > alpha for `spec` applied to draws of
/// `model`, with its binomial standard error.
FdxEstimate mc_fdx_oracle(const NullModel& model, const ProcedureSpec& spec, std::size_t replicates,
                          std::uint64_t seed, unsigned threads = 1);

/// m0 uniform nulls; the m - m0 alternatives are U^(1 / alt_shape), a
/// Beta(alt_shape, 1) law concentrated near 0.
NullModel uniform_model(std::size_t m, std::size_t m0, double alt_shape);

/// m Fisher tables with N subjects per group; the first m0 are null with
/// success probability p_null in both groups, the rest have p_null in group 1
/// and p_alt in group 2. The family is the conditional step CDFs.
NullModel fisher_model(std::size_t m, std::size_t m0, std::int64_t N, double p_null, double p_alt,
                       Sided sided);

}  // namespace fdx
