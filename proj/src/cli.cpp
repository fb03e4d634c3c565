#include "fdx/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "fdx/io.hpp"
#include "fdx/procedure.hpp"
#include "fdx/simharness.hpp"
#include "fdx/stepdown.hpp"
#include "fdx/transforms.hpp"

namespace fdx::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Sided parse_sided(const std::string& s) { return s == "one" ? Sided::One : Sided::Two; }

// Writes to `path`, or to `fallback` when the path is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw io::DataError("cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }
  bool is_file() const { return file_ != nullptr; }
  void finish(const std::string& path) {
    stream_->flush();
    if (!*stream_) throw io::DataError("write failed: " + (path.empty() ? std::string("stdout") : path));
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

struct FisherData {
  std::vector<double> pvalues;
  std::vector<NullCdf> cdfs;
};

// Fisher p-values and step CDFs for every table; tables sharing margins share
// one computation.
FisherData fisher_all(const std::vector<FisherTable>& tables, Sided sided, unsigned threads) {
  struct Entry {
    std::vector<double> support_pvalues;
    std::optional<NullCdf> cdf;
  };
  auto key = [](const FisherMargins& m) { return std::tuple(m.n1, m.n2, m.s); };
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::size_t> index;
  std::vector<FisherMargins> unique;
  for (const auto& t : tables) {
    if (index.emplace(key(t.margins), unique.size()).second) unique.push_back(t.margins);
  }
  std::vector<Entry> entries(unique.size());
  parallel_for(unique.size(), threads, [&](std::size_t j) {
    entries[j].support_pvalues = fisher_support_pvalues(unique[j], sided);
    entries[j].cdf = fisher_support_cdf(unique[j], sided);
  });
  FisherData d;
  d.pvalues.reserve(tables.size());
  d.cdfs.reserve(tables.size());
  for (const auto& t : tables) {
    const auto& e = entries[index.at(key(t.margins))];
    d.pvalues.push_back(e.support_pvalues[static_cast<std::size_t>(t.x - t.margins.lo())]);
    d.cdfs.push_back(*e.cdf);
  }
  return d;
}

struct InputOptions {
  std::string pvalues;
  std::string counts;
  std::string cdfs;
  std::string weights;
  std::string sided = "two";
  std::string alpha = "0.05";
  unsigned threads = 1;
};

void add_input_options(CLI::App& cmd, InputOptions& o) {
  auto* pv = cmd.add_option("--pvalues", o.pvalues, "CSV with header id,pvalue");
  auto* ct = cmd.add_option("--counts", o.counts, "CSV with header id,x1,n1,x2,n2 (Fisher exact tests)");
  pv->excludes(ct);
  cmd.add_option("--cdfs", o.cdfs, "CSV with header id,support,cum of null step CDFs");
  cmd.add_option("--weights", o.weights, "CSV with header id,weight");
  cmd.add_option("--sided", o.sided, "Fisher test sidedness")->check(CLI::IsMember({"one", "two"}));
  cmd.add_option("--alpha", o.alpha, "FDP threshold, a decimal or a ratio like 1/20");
  cmd.add_option("--threads", o.threads, "worker threads for Fisher CDFs")->check(CLI::PositiveNumber);
}

// The hypotheses under analysis with whatever inputs were supplied.
struct Problem {
  std::vector<std::string> ids;
  std::vector<double> pvalues;
  CdfFamilyPtr family;  // null when no CDFs are known
  std::optional<std::vector<double>> weights;
};

Problem load_problem(const InputOptions& o) {
  if (o.pvalues.empty() == o.counts.empty()) {
    throw UsageError("exactly one of --pvalues or --counts is required");
  }
  Problem pr;
  if (!o.counts.empty()) {
    auto counts = io::read_counts_file(o.counts);
    auto fd = fisher_all(counts.tables, parse_sided(o.sided), o.threads);
    pr.ids = std::move(counts.ids);
    pr.pvalues = std::move(fd.pvalues);
    if (o.cdfs.empty()) pr.family = std::make_shared<const CdfFamily>(std::move(fd.cdfs));
  } else {
    auto pv = io::read_pvalues_file(o.pvalues);
    pr.ids = std::move(pv.ids);
    pr.pvalues = std::move(pv.values);
  }
  if (!o.cdfs.empty()) {
    auto cdfs = io::read_cdfs_file(o.cdfs);
    io::require_same_ids(pr.ids, cdfs.ids, "--cdfs");
    pr.family = std::make_shared<const CdfFamily>(std::move(cdfs.cdfs));
  }
  if (!o.weights.empty()) {
    auto w = io::read_weights_file(o.weights);
    io::require_same_ids(pr.ids, w.ids, "--weights");
    pr.weights = std::move(w.values);
  }
  if (pr.ids.empty()) throw io::DataError("no hypotheses in input");
  return pr;
}

ProcedureSpec make_spec(Procedure kind, const AlphaLevel& alpha, double zeta, const Problem& pr) {
  ProcedureSpec spec;
  spec.kind = kind;
  spec.alpha = alpha;
  spec.zeta = zeta;
  if (needs_family(kind)) {
    if (!pr.family) {
      throw UsageError(std::string(procedure_name(kind)) + " needs null CDFs: pass --cdfs or --counts");
    }
    spec.family = pr.family;
  }
  if (needs_weights(kind)) {
    if (!pr.weights) throw UsageError(std::string(procedure_name(kind)) + " needs --weights");
    spec.weights = pr.weights;
  }
  return spec;
}

Procedure procedure_or_throw(const std::string& name) {
  const auto kind = parse_procedure(name);
  if (!kind) throw UsageError("unknown procedure '" + name + "'");
  return *kind;
}

void warn_off_support(const Problem& pr, Procedure kind, std::ostream& err) {
  if (!needs_family(kind) || !pr.family) return;
  const auto off = off_support(pr.pvalues, *pr.family);
  if (off.empty()) return;
  err << "warning: " << off.size() << " p-value(s) are not support points of their null CDF (first: "
      << pr.ids[off.front()] << "); proceeding through adjusted p-values\n";
}

int cmd_adjust(const InputOptions& in, const std::string& procedure, double zeta, const std::string& out_path,
               std::ostream& out, std::ostream& err) {
  const auto kind = procedure_or_throw(procedure);
  const auto alpha = io::parse_alpha(in.alpha);
  const auto pr = load_problem(in);
  const auto spec = make_spec(kind, alpha, zeta, pr);
  warn_off_support(pr, kind, err);
  const auto run = run_procedure(spec, pr.pvalues);
  std::vector<bool> rejected(pr.pvalues.size(), false);
  for (const auto i : run.result.rejected) rejected[i] = true;

  Sink sink(out_path, out);
  io::write_results(*sink, pr.ids, pr.pvalues, run.result.adjusted, rejected);
  sink.finish(out_path);
  auto& summary = sink.is_file() ? out : err;
  summary << "rejected " << run.result.ell_hat << " of " << pr.pvalues.size()
          << " at alpha=" << io::format_double(alpha.value()) << ", zeta=" << io::format_double(zeta) << '\n';
  return kSuccess;
}

int cmd_fisher_cdf(const InputOptions& in, const std::string& out_path, const std::string& pvalues_out,
                   std::ostream& out) {
  if (in.counts.empty()) throw UsageError("--counts is required");
  const auto counts = io::read_counts_file(in.counts);
  const auto fd = fisher_all(counts.tables, parse_sided(in.sided), in.threads);
  Sink sink(out_path, out);
  io::write_cdfs(*sink, counts.ids, fd.cdfs);
  sink.finish(out_path);
  if (!pvalues_out.empty()) {
    Sink pv(pvalues_out, out);
    io::write_pvalues(*pv, counts.ids, fd.pvalues);
    pv.finish(pvalues_out);
  }
  return kSuccess;
}

int cmd_curve(const InputOptions& in, const std::vector<std::string>& procedures, const std::string& grid_text,
              const std::string& out_path, std::ostream& out, std::ostream& err) {
  std::vector<Procedure> kinds;
  for (const auto& name : procedures) kinds.push_back(procedure_or_throw(name));
  const auto grid = parse_zeta_grid(grid_text);
  const auto alpha = io::parse_alpha(in.alpha);
  const auto pr = load_problem(in);

  Sink sink(out_path, out);
  *sink << "procedure,zeta,rejections\n";
  for (const auto kind : kinds) {
    // Adjusted p-values do not depend on zeta; one pass serves the whole grid.
    const auto spec = make_spec(kind, alpha, 0.5, pr);
    warn_off_support(pr, kind, err);
    const auto run = run_procedure(spec, pr.pvalues);
    auto adjusted = run.result.adjusted;
    std::sort(adjusted.begin(), adjusted.end());
    for (const double z : grid) {
      const auto count = std::upper_bound(adjusted.begin(), adjusted.end(), z) - adjusted.begin();
      *sink << procedure_name(kind) << ',' << io::format_double(z) << ',' << count << '\n';
    }
  }
  sink.finish(out_path);
  return kSuccess;
}

struct SimOptions {
  std::string config;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> procedures;
};

void add_sim_options(CLI::App& cmd, SimOptions& o) {
  cmd.add_option("--config", o.config, "key = value settings file");
  cmd.add_option("--set", o.set, "override a setting, key=value (repeatable)");
  cmd.add_option("--seed", o.seed, "base seed");
  cmd.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd.add_option("--procedures", o.procedures, "bh, lr, gr, dlr, dpb, dgr, dgr-na (default: bh lr dlr gr dpb dgr)")
      ->delimiter(',');
}

SimConfig sim_config(const SimOptions& o) {
  io::Settings settings;
  if (!o.config.empty()) {
    std::ifstream f(o.config);
    if (!f) throw io::DataError("cannot open " + o.config);
    settings = io::read_sim_settings(f);
  }
  for (const auto& s : o.set) settings.push_back(io::parse_setting(s));
  if (o.seed) settings.emplace_back("seed", std::to_string(*o.seed));
  if (o.threads) settings.emplace_back("threads", std::to_string(*o.threads));
  auto config = io::build_sim_config(settings);
  if (config.replicates == 0) throw ConfigError("replicates must be positive");
  return config;
}

std::vector<SimProcedure> sim_procedures(const SimOptions& o) {
  if (o.procedures.empty()) return table2_procedures();
  std::vector<SimProcedure> out;
  for (const auto& name : o.procedures) {
    auto p = parse_sim_procedure(name);
    if (!p) throw UsageError("unknown simulation procedure '" + name + "'");
    out.push_back(std::move(*p));
  }
  return out;
}

std::function<void(std::size_t)> progress_reporter(std::ostream& err, std::size_t total, std::string prefix) {
  const std::size_t step = std::max<std::size_t>(1, total / 10);
  return [&err, total, step, prefix = std::move(prefix)](std::size_t done) {
    if (done % step == 0 || done == total) err << prefix << done << '/' << total << " replicates\n";
  };
}

int cmd_simulate(const SimOptions& o, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto config = sim_config(o);
  const auto procs = sim_procedures(o);
  const auto result = run_scenario(config, procs, progress_reporter(err, config.replicates, ""));
  Sink sink(out_path, out);
  io::write_sim_header(*sink);
  io::write_sim_rows(*sink, 1, result);
  sink.finish(out_path);
  return kSuccess;
}

int cmd_sweep(const SimOptions& o, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto base = sim_config(o);
  const auto procs = sim_procedures(o);
  const auto configs = table2_configurations(base);
  Sink sink(out_path, out);
  io::write_sim_header(*sink);
  for (std::size_t s = 0; s < configs.size(); ++s) {
    const auto prefix = "scenario " + std::to_string(s + 1) + '/' + std::to_string(configs.size()) + ": ";
    const auto result = run_scenario(configs[s], procs, progress_reporter(err, configs[s].replicates, prefix));
    io::write_sim_rows(*sink, s + 1, result);
    (*sink).flush();
  }
  sink.finish(out_path);
  return kSuccess;
}

}  // namespace

std::vector<double> parse_zeta_grid(const std::string& text) {
  const auto parts = io::split(text, ':');
  if (parts.size() != 3) throw UsageError("--zeta-grid expects a:b:step");
  const double a = io::parse_double(parts[0]);
  const double b = io::parse_double(parts[1]);
  const double step = io::parse_double(parts[2]);
  if (!(step > 0.0)) throw UsageError("--zeta-grid step must be positive");
  std::vector<double> grid;
  if (a > b) return grid;
  const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    // Rounded to 12 decimals so 0.1:0.9:0.2 yields 0.3 rather than 0.30000000000000004.
    const double z = std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12;
    if (!(z > 0.0 && z < 1.0)) throw UsageError("--zeta-grid points must lie in (0,1)");
    grid.push_back(z);
  }
  return grid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FDX-controlling step-down procedures for heterogeneous and discrete nulls", "fdx"};
  app.require_subcommand(1);

  InputOptions adjust_in;
  std::string adjust_proc;
  double adjust_zeta = 0.5;
  std::string adjust_out;
  auto* adjust = app.add_subcommand("adjust", "adjusted p-values and rejections for one procedure");
  add_input_options(*adjust, adjust_in);
  adjust->add_option("--procedure", adjust_proc, "lr, gr, hlr, hgr, hgr-na, pb, wlr-am, wlr-gm, wpb-am, wpb-gm, "
                                                 "wgr-am, wgr-gm")
      ->required();
  adjust->add_option("--zeta", adjust_zeta, "exceedance probability bound");
  adjust->add_option("--out", adjust_out, "results CSV (default: stdout)");

  InputOptions fisher_in;
  std::string fisher_out;
  std::string fisher_pv_out;
  auto* fisher = app.add_subcommand("fisher-cdf", "Fisher exact p-values and null step CDFs from counts");
  add_input_options(*fisher, fisher_in);
  fisher->add_option("--out", fisher_out, "CDF CSV (default: stdout)");
  fisher->add_option("--pvalues-out", fisher_pv_out, "also write the p-values as id,pvalue");

  InputOptions curve_in;
  std::vector<std::string> curve_procs;
  std::string curve_grid;
  std::string curve_out;
  auto* curve = app.add_subcommand("curve", "rejection counts over a zeta grid");
  add_input_options(*curve, curve_in);
  curve->add_option("--procedure", curve_procs, "procedure(s), repeatable or comma separated")
      ->required()
      ->delimiter(',');
  curve->add_option("--zeta-grid", curve_grid, "a:b:step")->required();
  curve->add_option("--out", curve_out, "CSV procedure,zeta,rejections (default: stdout)");

  SimOptions sim_opts;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo study of one configuration");
  add_sim_options(*simulate, sim_opts);
  simulate->add_option("--out", sim_out, "results CSV (default: stdout)");

  SimOptions sweep_opts;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "all 54 configurations of the full study (long running)");
  add_sim_options(*sweep, sweep_opts);
  sweep->add_option("--out", sweep_out, "results CSV (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*adjust) return cmd_adjust(adjust_in, adjust_proc, adjust_zeta, adjust_out, out, err);
    if (*fisher) return cmd_fisher_cdf(fisher_in, fisher_out, fisher_pv_out, out);
    if (*curve) return cmd_curve(curve_in, curve_procs, curve_grid, curve_out, out, err);
    if (*simulate) return cmd_simulate(sim_opts, sim_out, out, err);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_out, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace fdx::cli
