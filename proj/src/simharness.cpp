#include "fdx/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "fdx/procedure.hpp"
#include "fdx/stepdown.hpp"

namespace fdx {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

bool in_open_unit(double p) { return p > 0.0 && p < 1.0; }

TrialOutcome score(const std::vector<std::size_t>& rejected, const std::vector<bool>& is_null,
                   std::size_t n_alternatives) {
  std::size_t false_rejections = 0;
  for (const auto i : rejected) false_rejections += is_null[i] ? 1 : 0;
  TrialOutcome out;
  out.rejections = rejected.size();
  out.fdp = rejected.empty() ? 0.0
                             : static_cast<double>(false_rejections) / static_cast<double>(rejected.size());
  out.tdp = n_alternatives == 0
                ? 0.0
                : static_cast<double>(rejected.size() - false_rejections) / static_cast<double>(n_alternatives);
  return out;
}

// Per-margin cache of the attainable p-values and step CDF. Within one
// scenario n1 = n2 = N, so the CDF depends on the success total alone.
class FisherCache {
 public:
  FisherCache(std::int64_t n1, std::int64_t n2, Sided sided) : n1_(n1), n2_(n2), sided_(sided) {}

  const std::pair<std::vector<double>, NullCdf>& get(std::int64_t s) {
    auto it = entries_.find(s);
    if (it == entries_.end()) {
      const FisherMargins mg{n1_, n2_, s};
      it = entries_.emplace(s, std::make_pair(fisher_support_pvalues(mg, sided_), fisher_support_cdf(mg, sided_)))
               .first;
    }
    return it->second;
  }

 private:
  std::int64_t n1_;
  std::int64_t n2_;
  Sided sided_;
  std::map<std::int64_t, std::pair<std::vector<double>, NullCdf>> entries_;
};

struct TableDraw {
  std::vector<double> pvalues;
  std::vector<NullCdf> cdfs;
};

TableDraw draw_tables(std::mt19937_64& rng, std::int64_t N, std::span<const double> prob1,
                      std::span<const double> prob2, FisherCache& cache) {
  TableDraw d;
  d.pvalues.resize(prob1.size());
  d.cdfs.resize(prob1.size());
  for (std::size_t i = 0; i < prob1.size(); ++i) {
    const auto x1 = std::binomial_distribution<std::int64_t>(N, prob1[i])(rng);
    const auto x2 = std::binomial_distribution<std::int64_t>(N, prob2[i])(rng);
    const std::int64_t s = x1 + x2;
    const auto& [pvals, cdf] = cache.get(s);
    const std::int64_t lo = s > N ? s - N : 0;
    d.pvalues[i] = pvals[static_cast<std::size_t>(x1 - lo)];
    d.cdfs[i] = cdf;
  }
  return d;
}

}  // namespace

void SimConfig::validate() const {
  if (m == 0 || m1 + m2 + m3 != m) throw ConfigError("simulation: m1 + m2 + m3 must equal m > 0");
  if (!in_open_unit(q3) || !in_open_unit(p_null_low) || !in_open_unit(p_null_high) || !in_open_unit(p_alt_base)) {
    throw ConfigError("simulation: success probabilities must lie in (0,1)");
  }
  if (N <= 0) throw ConfigError("simulation: N must be positive");
  if (!in_open_unit(zeta)) throw ConfigError("simulation: zeta must lie in (0,1)");
  if (replicates == 0) throw ConfigError("simulation: replicates must be positive");
  if (threads == 0) throw ConfigError("simulation: threads must be positive");
}

std::optional<SimProcedure> parse_sim_procedure(std::string_view name) {
  if (name == "bh") return SimProcedure::bh();
  if (name == "lr") return SimProcedure{"LR", Procedure::LR, false};
  if (name == "gr") return SimProcedure{"GR", Procedure::GR, false};
  if (name == "dlr") return SimProcedure{"DLR", Procedure::HLR, true};
  if (name == "dpb") return SimProcedure{"DPB", Procedure::PB, true};
  if (name == "dgr") return SimProcedure{"DGR", Procedure::HGR, true};
  if (name == "dgr-na") return SimProcedure{"DGR-NA", Procedure::HGR_NONADAPTIVE, true};
  return std::nullopt;
}

std::vector<SimProcedure> table2_procedures() {
  std::vector<SimProcedure> out;
  for (const char* name : {"bh", "lr", "dlr", "gr", "dpb", "dgr"}) out.push_back(*parse_sim_procedure(name));
  return out;
}

std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t r = 0; r < count; ++r) task(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  const unsigned n = std::min<std::size_t>(threads, count);
  for (unsigned w = 0; w < n; ++w) {
    workers.emplace_back([&] {
      for (std::size_t r = next++; r < count; r = next++) {
        try {
          task(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::size_t> bh_rejections(std::span<const double> pvals, double alpha) {
  const auto order = stable_order(pvals);
  const auto m = static_cast<double>(pvals.size());
  std::size_t k = 0;
  for (std::size_t j = pvals.size(); j > 0; --j) {
    if (pvals[order[j - 1]] <= alpha * static_cast<double>(j) / m) {
      k = j;
      break;
    }
  }
  std::vector<std::size_t> rejected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(rejected.begin(), rejected.end());
  return rejected;
}

ScenarioResult run_scenario(const SimConfig& config, const std::vector<SimProcedure>& procedures,
                            const std::function<void(std::size_t)>& progress) {
  config.validate();
  const std::size_t m = config.m;
  std::vector<double> prob1(m);
  std::vector<double> prob2(m);
  std::vector<bool> is_null(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (i < config.m1) {
      prob1[i] = prob2[i] = config.p_null_low;
      is_null[i] = true;
    } else if (i < config.m1 + config.m2) {
      prob1[i] = prob2[i] = config.p_null_high;
      is_null[i] = true;
    } else {
      prob1[i] = config.p_alt_base;
      prob2[i] = config.q3;
      is_null[i] = false;
    }
  }

  ScenarioResult result;
  result.config = config;
  result.trials.resize(config.replicates);
  std::size_t done = 0;
  std::mutex progress_mutex;

  parallel_for(config.replicates, config.threads, [&](std::size_t r) {
    auto rng = replicate_engine(config.seed, r);
    FisherCache cache(config.N, config.N, config.sided);
    auto tables = draw_tables(rng, config.N, prob1, prob2, cache);
    const auto family = std::make_shared<const CdfFamily>(std::move(tables.cdfs));

    TrialRecord record;
    record.replicate = r;
    for (const auto& proc : procedures) {
      std::vector<std::size_t> rejected;
      if (!proc.kind) {
        rejected = bh_rejections(tables.pvalues, config.alpha.value());
      } else {
        ProcedureSpec spec;
        spec.kind = *proc.kind;
        spec.alpha = config.alpha;
        spec.zeta = config.zeta;
        if (proc.discrete) spec.family = family;
        rejected = run_procedure_fast(spec, tables.pvalues).result.rejected;
      }
      record.outcomes.push_back(score(rejected, is_null, config.m3));
    }
    result.trials[r] = std::move(record);
    std::lock_guard lock(progress_mutex);
    ++done;
    if (progress) progress(done);
  });

  const auto reps = static_cast<double>(config.replicates);
  for (std::size_t j = 0; j < procedures.size(); ++j) {
    CompensatedSum tdp;
    CompensatedSum tdp_sq;
    CompensatedSum rejections;
    std::size_t exceed = 0;
    for (const auto& trial : result.trials) {
      const auto& o = trial.outcomes[j];
      tdp.add(o.tdp);
      tdp_sq.add(o.tdp * o.tdp);
      rejections.add(static_cast<double>(o.rejections));
      exceed += o.fdp > config.alpha.value() ? 1 : 0;
    }
    ProcedureSummary s;
    s.label = procedures[j].label;
    s.mean_tdp = tdp.value() / reps;
    const double var = config.replicates > 1
                           ? std::max(0.0, (tdp_sq.value() - reps * s.mean_tdp * s.mean_tdp) / (reps - 1.0))
                           : 0.0;
    s.se_tdp = std::sqrt(var / reps);
    s.fdx = static_cast<double>(exceed) / reps;
    s.fdx_se = std::sqrt(s.fdx * (1.0 - s.fdx) / reps);
    s.mean_rejections = rejections.value() / reps;
    result.summaries.push_back(s);
  }
  return result;
}

std::vector<SimConfig> table2_configurations(const SimConfig& base) {
  std::vector<SimConfig> configs;
  for (const std::size_t m : {800, 2000}) {
    for (const double alt_share : {0.1, 0.3, 0.8}) {
      for (const double low_share : {0.2, 0.5, 0.8}) {
        for (const double q : {0.15, 0.25, 0.4}) {
          SimConfig c = base;
          c.m = m;
          c.m3 = static_cast<std::size_t>(std::llround(alt_share * static_cast<double>(m)));
          c.m1 = static_cast<std::size_t>(std::llround(low_share * static_cast<double>(m - c.m3)));
          c.m2 = m - c.m1 - c.m3;
          c.q3 = q;
          configs.push_back(c);
        }
      }
    }
  }
  return configs;
}

FdxEstimate mc_fdx_oracle(const NullModel& model, const ProcedureSpec& spec, std::size_t replicates,
                          std::uint64_t seed, unsigned threads) {
  if (replicates == 0) throw ConfigError("oracle: replicates must be positive");
  std::vector<char> exceeded(replicates, 0);
  parallel_for(replicates, threads, [&](std::size_t r) {
    auto rng = replicate_engine(seed, r);
    const auto draw = model(rng);
    ProcedureSpec local = spec;
    if (needs_family(spec.kind)) local.family = draw.family;
    const auto run = run_procedure_fast(local, draw.pvalues);
    const auto n_alt = static_cast<std::size_t>(std::count(draw.is_null.begin(), draw.is_null.end(), false));
    exceeded[r] = score(run.result.rejected, draw.is_null, n_alt).fdp > spec.alpha.value() ? 1 : 0;
  });
  FdxEstimate est;
  est.replicates = replicates;
  est.exceed_count = static_cast<std::size_t>(std::count(exceeded.begin(), exceeded.end(), 1));
  est.exceedance = static_cast<double>(est.exceed_count) / static_cast<double>(replicates);
  est.se = std::sqrt(est.exceedance * (1.0 - est.exceedance) / static_cast<double>(replicates));
  return est;
}

NullModel uniform_model(std::size_t m, std::size_t m0, double alt_shape) {
  if (m0 > m) throw ConfigError("uniform model: m0 exceeds m");
  auto family = std::make_shared<const CdfFamily>(CdfFamily::uniform(m));
  return [=](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ModelDraw d;
    d.pvalues.resize(m);
    d.is_null.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double u = unif(rng);
      d.is_null[i] = i < m0;
      d.pvalues[i] = i < m0 ? u : std::pow(u, 1.0 / alt_shape);
    }
    d.family = family;
    return d;
  };
}

NullModel fisher_model(std::size_t m, std::size_t m0, std::int64_t N, double p_null, double p_alt,
                       Sided sided) {
  if (m0 > m) throw ConfigError("Fisher model: m0 exceeds m");
  std::vector<double> prob1(m, p_null);
  std::vector<double> prob2(m, p_null);
  std::vector<bool> is_null(m);
  for (std::size_t i = 0; i < m; ++i) {
    is_null[i] = i < m0;
    if (i >= m0) prob2[i] = p_alt;
  }
  return [=](std::mt19937_64& rng) {
    FisherCache cache(N, N, sided);
    auto tables = draw_tables(rng, N, prob1, prob2, cache);
    ModelDraw d;
    d.pvalues = std::move(tables.pvalues);
    d.is_null = is_null;
    d.family = std::make_shared<const CdfFamily>(std::move(tables.cdfs));
    return d;
  };
}

}  // namespace fdx
