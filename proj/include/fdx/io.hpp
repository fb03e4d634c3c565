#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fdx/distributions.hpp"
#include "fdx/fisher.hpp"
#include "fdx/simharness.hpp"

namespace fdx::io {

/// Malformed or inconsistent input data; carries the offending line when known.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Locale-independent parsing and shortest round-trip formatting.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::string format_double(double value);
/// `0.05` or an exact ratio such as `1/20`.
AlphaLevel parse_alpha(std::string_view text);

/// Splits on a single-character separator, keeping empty fields.
std::vector<std::string_view> split(std::string_view line, char sep);

struct NamedValues {
  std::vector<std::string> ids;
  std::vector<double> values;
};

struct CountsTable {
  std::vector<std::string> ids;
  std::vector<FisherTable> tables;
};

struct CdfTable {
  std::vector<std::string> ids;
  std::vector<NullCdf> cdfs;
};

/// `id,pvalue` with values in [0,1].
NamedValues read_pvalues(std::istream& in);
/// `id,weight` with non-negative values.
NamedValues read_weights(std::istream& in);
/// `id,x1,n1,x2,n2`
CountsTable read_counts(std::istream& in);
/// `id,support,cum` where support and cum are `;`-separated lists.
CdfTable read_cdfs(std::istream& in);

void write_pvalues(std::ostream& out, const std::vector<std::string>& ids, const std::vector<double>& pvalues);
void write_cdfs(std::ostream& out, const std::vector<std::string>& ids, const std::vector<NullCdf>& cdfs);

/// `id,pvalue,adjusted_pvalue,rejected`; adjusted values are capped at 1.
void write_results(std::ostream& out, const std::vector<std::string>& ids, const std::vector<double>& pvalues,
                   const std::vector<double>& adjusted, const std::vector<bool>& rejected);

/// Throws DataError unless both lists name the same ids in the same order.
void require_same_ids(const std::vector<std::string>& a, const std::vector<std::string>& b, std::string_view what);

/// File helpers that raise DataError when a path cannot be opened.
NamedValues read_pvalues_file(const std::string& path);
NamedValues read_weights_file(const std::string& path);
CountsTable read_counts_file(const std::string& path);
CdfTable read_cdfs_file(const std::string& path);

using Settings = std::vector<std::pair<std::string, std::string>>;

/// `key = value` lines with `#` comments, in file order.
Settings read_sim_settings(std::istream& in);
/// Parses `key=value`.
std::pair<std::string, std::string> parse_setting(std::string_view assignment);

/// Builds a validated SimConfig from settings applied in order over the
/// defaults. Keys: m, m1, m2, m3, q3, p_null_low, p_null_high, p_alt_base, N,
/// alpha, zeta, replicates, seed, sided, threads. When m2 is never set it is
/// derived as m - m1 - m3. Throws ConfigError for unknown keys.
SimConfig build_sim_config(const Settings& settings);

void write_sim_header(std::ostream& out);
void write_sim_rows(std::ostream& out, std::size_t scenario, const ScenarioResult& result);

}  // namespace fdx::io
