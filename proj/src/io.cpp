#include "fdx/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace fdx::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail_at(std::size_t line, const std::string& message) {
  throw DataError("line " + std::to_string(line) + ": " + message);
}

// Reads a CSV with a fixed header; calls row(fields) per record and tags
// any exception it throws with the line number.
template <typename Row>
void read_csv(std::istream& in, std::string_view expected_header, Row&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  const auto expected_fields = split(expected_header, ',').size();
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (!header_seen) {
      if (body != expected_header) {
        fail_at(line_no, "expected header '" + std::string(expected_header) + "', got '" + std::string(body) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(body, ',');
    if (fields.size() != expected_fields) {
      fail_at(line_no, "expected " + std::to_string(expected_fields) + " fields, got " +
                           std::to_string(fields.size()));
    }
    try {
      row(fields);
    } catch (const std::exception& e) {
      fail_at(line_no, e.what());
    }
  }
  if (!header_seen) throw DataError("empty input: missing header '" + std::string(expected_header) + "'");
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  for (const auto item : split(text, ';')) out.push_back(parse_double(trim(item)));
  return out;
}

template <typename T, typename Reader>
T read_file(const std::string& path, Reader&& reader) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return reader(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace

double parse_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw DataError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view text) {
  text = trim(text);
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw DataError("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

NamedValues read_pvalues(std::istream& in) {
  NamedValues nv;
  read_csv(in, "id,pvalue", [&](const auto& f) {
    const double p = parse_double(f[1]);
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("p-value outside [0,1]");
    nv.ids.emplace_back(trim(f[0]));
    nv.values.push_back(p);
  });
  return nv;
}

NamedValues read_weights(std::istream& in) {
  NamedValues nv;
  read_csv(in, "id,weight", [&](const auto& f) {
    const double w = parse_double(f[1]);
    if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("weight must be finite and non-negative");
    nv.ids.emplace_back(trim(f[0]));
    nv.values.push_back(w);
  });
  return nv;
}

CountsTable read_counts(std::istream& in) {
  CountsTable ct;
  read_csv(in, "id,x1,n1,x2,n2", [&](const auto& f) {
    const auto x1 = parse_int(f[1]);
    const auto n1 = parse_int(f[2]);
    const auto x2 = parse_int(f[3]);
    const auto n2 = parse_int(f[4]);
    if (x1 < 0 || x2 < 0 || x1 > n1 || x2 > n2) throw DataError("counts must satisfy 0 <= x <= n");
    ct.ids.emplace_back(trim(f[0]));
    ct.tables.push_back(FisherTable::from_counts(x1, n1, x2, n2));
  });
  return ct;
}

CdfTable read_cdfs(std::istream& in) {
  CdfTable ct;
  read_csv(in, "id,support,cum", [&](const auto& f) {
    ct.ids.emplace_back(trim(f[0]));
    ct.cdfs.push_back(NullCdf::step(parse_list(f[1]), parse_list(f[2])));
  });
  return ct;
}

void write_pvalues(std::ostream& out, const std::vector<std::string>& ids, const std::vector<double>& pvalues) {
  out << "id,pvalue\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << format_double(pvalues[i]) << '\n';
}

void write_cdfs(std::ostream& out, const std::vector<std::string>& ids, const std::vector<NullCdf>& cdfs) {
  out << "id,support,cum\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto* step = cdfs[i].as_step();
    if (step == nullptr) throw DataError("only step CDFs can be written");
    out << ids[i] << ',';
    for (std::size_t j = 0; j < step->support().size(); ++j) {
      out << (j ? ";" : "") << format_double(step->support()[j]);
    }
    out << ',';
    for (std::size_t j = 0; j < step->cum().size(); ++j) out << (j ? ";" : "") << format_double(step->cum()[j]);
    out << '\n';
  }
}

void write_results(std::ostream& out, const std::vector<std::string>& ids, const std::vector<double>& pvalues,
                   const std::vector<double>& adjusted, const std::vector<bool>& rejected) {
  out << "id,pvalue,adjusted_pvalue,rejected\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i] << ',' << format_double(pvalues[i]) << ',' << format_double(std::min(adjusted[i], 1.0)) << ','
        << (rejected[i] ? "true" : "false") << '\n';
  }
}

void require_same_ids(const std::vector<std::string>& a, const std::vector<std::string>& b, std::string_view what) {
  if (a.size() != b.size()) {
    throw DataError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + " records)");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) {
      throw DataError(std::string(what) + ": id mismatch at record " + std::to_string(i + 1) + " ('" + a[i] +
                      "' vs '" + b[i] + "')");
    }
  }
}

NamedValues read_pvalues_file(const std::string& path) {
  return read_file<NamedValues>(path, [](std::istream& in) { return read_pvalues(in); });
}
NamedValues read_weights_file(const std::string& path) {
  return read_file<NamedValues>(path, [](std::istream& in) { return read_weights(in); });
}
CountsTable read_counts_file(const std::string& path) {
  return read_file<CountsTable>(path, [](std::istream& in) { return read_counts(in); });
}
CdfTable read_cdfs_file(const std::string& path) {
  return read_file<CdfTable>(path, [](std::istream& in) { return read_cdfs(in); });
}

std::pair<std::string, std::string> parse_setting(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  const auto key = trim(assignment.substr(0, eq));
  const auto value = trim(assignment.substr(eq + 1));
  if (key.empty() || value.empty()) throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  return {std::string(key), std::string(value)};
}

Settings read_sim_settings(std::istream& in) {
  Settings settings;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = std::string_view(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    try {
      settings.push_back(parse_setting(body));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return settings;
}

namespace {

std::size_t parse_count(std::string_view key, std::string_view v) {
  const auto n = parse_int(v);
  if (n < 0) throw ConfigError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(n);
}

}  // namespace

AlphaLevel parse_alpha(std::string_view v) {
  v = trim(v);
  if (const auto slash = v.find('/'); slash != std::string_view::npos) {
    return AlphaLevel::rational(parse_int(v.substr(0, slash)), parse_int(v.substr(slash + 1)));
  }
  return AlphaLevel(parse_double(v));
}

SimConfig build_sim_config(const Settings& settings) {
  SimConfig c;
  bool m2_set = false;
  for (const auto& [key, value] : settings) {
    try {
      if (key == "m") {
        c.m = parse_count(key, value);
      } else if (key == "m1") {
        c.m1 = parse_count(key, value);
      } else if (key == "m2") {
        c.m2 = parse_count(key, value);
        m2_set = true;
      } else if (key == "m3") {
        c.m3 = parse_count(key, value);
      } else if (key == "q3") {
        c.q3 = parse_double(value);
      } else if (key == "p_null_low") {
        c.p_null_low = parse_double(value);
      } else if (key == "p_null_high") {
        c.p_null_high = parse_double(value);
      } else if (key == "p_alt_base") {
        c.p_alt_base = parse_double(value);
      } else if (key == "N") {
        c.N = parse_int(value);
      } else if (key == "alpha") {
        c.alpha = parse_alpha(value);
      } else if (key == "zeta") {
        c.zeta = parse_double(value);
      } else if (key == "replicates") {
        c.replicates = parse_count(key, value);
      } else if (key == "seed") {
        c.seed = static_cast<std::uint64_t>(parse_int(value));
      } else if (key == "sided") {
        if (value == "one") {
          c.sided = Sided::One;
        } else if (value == "two") {
          c.sided = Sided::Two;
        } else {
          throw ConfigError("sided must be 'one' or 'two'");
        }
      } else if (key == "threads") {
        c.threads = static_cast<unsigned>(parse_count(key, value));
      } else {
        throw ConfigError("unknown configuration key '" + key + "'");
      }
    } catch (const DataError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  if (!m2_set) {
    if (c.m1 + c.m3 > c.m) throw ConfigError("m1 + m3 exceeds m");
    c.m2 = c.m - c.m1 - c.m3;
  }
  c.validate();
  return c;
}

void write_sim_header(std::ostream& out) {
  out << "scenario,m,m1,m2,m3,q3,N,alpha,zeta,replicates,seed,procedure,mean_tdp,se_tdp,fdx,fdx_se,mean_rejections\n";
}

void write_sim_rows(std::ostream& out, std::size_t scenario, const ScenarioResult& result) {
  const auto& c = result.config;
  for (const auto& s : result.summaries) {
    out << scenario << ',' << c.m << ',' << c.m1 << ',' << c.m2 << ',' << c.m3 << ',' << format_double(c.q3) << ','
        << c.N << ',' << format_double(c.alpha.value()) << ',' << format_double(c.zeta) << ',' << c.replicates << ','
        << c.seed << ',' << s.label << ',' << format_double(s.mean_tdp) << ',' << format_double(s.se_tdp) << ','
        << format_double(s.fdx) << ',' << format_double(s.fdx_se) << ',' << format_double(s.mean_rejections)
        << '\n';
  }
}

}  // namespace fdx::io
