#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fdx/cli.hpp"
#include "fdx/io.hpp"

namespace fs = std::filesystem;
using namespace fdx;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("fdx_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kCounts =
    "id,x1,n1,x2,n2\n"
    "a,1,1,0,1\n"
    "b,3,3,0,3\n"
    "c,0,5,0,5\n"
    "d,9,20,1,20\n"
    "e,12,25,2,25\n"
    "f,4,25,3,25\n"
    "g,15,30,4,30\n";

}  // namespace

TEST_CASE("numeric parsing and formatting") {
  CHECK(io::parse_double("0.25") == 0.25);
  CHECK(io::parse_double(" 1e-3 ") == 0.001);
  CHECK_THROWS_AS(io::parse_double("0,25"), io::DataError);
  CHECK_THROWS_AS(io::parse_double("1.5x"), io::DataError);
  CHECK_THROWS_AS(io::parse_int("2.0"), io::DataError);
  for (const double v : {0.1, 1.0 / 3.0, 1e-300, 0.30000000000000004}) {
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::split("a;;b", ';').size() == 3);
  CHECK(io::parse_alpha("1/20").floor_times(20) == 1);
  CHECK(io::parse_alpha("0.05").value() == 0.05);
}

TEST_CASE("csv readers") {
  std::istringstream ok("id,pvalue\nh1,0.01\n\nh2,1\n");
  const auto pv = io::read_pvalues(ok);
  CHECK(pv.ids == std::vector<std::string>{"h1", "h2"});
  CHECK(pv.values == std::vector<double>{0.01, 1.0});

  std::istringstream bad_header("name,p\nh1,0.1\n");
  CHECK_THROWS_AS(io::read_pvalues(bad_header), io::DataError);

  std::istringstream out_of_range("id,pvalue\nh1,0.1\nh2,1.5\n");
  try {
    io::read_pvalues(out_of_range);
    FAIL("expected a DataError");
  } catch (const io::DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  std::istringstream bad_counts("id,x1,n1,x2,n2\nr1,1,2,0,2\nr2,5,3,0,3\n");
  try {
    io::read_counts(bad_counts);
    FAIL("expected a DataError");
  } catch (const io::DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  std::istringstream cdfs("id,support,cum\nx,0.1;1,0.1;1\n");
  const auto c = io::read_cdfs(cdfs);
  REQUIRE(c.cdfs.size() == 1);
  CHECK(c.cdfs[0].as_step()->support() == std::vector<double>{0.1, 1.0});

  std::istringstream short_row("id,weight\nh1\n");
  CHECK_THROWS_AS(io::read_weights(short_row), io::DataError);

  CHECK_THROWS_AS(io::require_same_ids({"a", "b"}, {"a"}, "weights"), io::DataError);
  CHECK_THROWS_AS(io::require_same_ids({"a", "b"}, {"a", "c"}, "weights"), io::DataError);
}

TEST_CASE("simulation settings") {
  std::istringstream in("# desk scale\nm = 800\nm3 = 80\nm1 = 144\nq3 = 0.4\nreplicates = 10 # short\nsided = one\n");
  const auto cfg = io::build_sim_config(io::read_sim_settings(in));
  CHECK(cfg.m2 == 576);
  CHECK(cfg.replicates == 10);
  CHECK(cfg.sided == Sided::One);
  CHECK_THROWS_AS(io::build_sim_config({{"bogus", "1"}}), ConfigError);
  CHECK_THROWS_AS(io::build_sim_config({{"m", "abc"}}), ConfigError);
  CHECK_THROWS_AS(io::parse_setting("novalue"), ConfigError);
  CHECK(io::build_sim_config({{"alpha", "1/10"}}).alpha.floor_times(10) == 1);
}

TEST_CASE("adjust") {
  Scratch s;
  const auto one = s.write("one.csv", "id,pvalue\nx,0.5\n");
  const auto r = invoke({"adjust", "--procedure", "lr", "--pvalues", one, "--zeta", "0.5", "--alpha", "0.05", "--out",
                      s.path("r.csv")});
  CHECK(r.code == 0);
  CHECK(r.out == "rejected 1 of 1 at alpha=0.05, zeta=0.5\n");
  CHECK(slurp(s.path("r.csv")) == "id,pvalue,adjusted_pvalue,rejected\nx,0.5,0.5,true\n");

  const auto two = s.write("two.csv", "id,pvalue\nh1,0.01\nh2,0.5\n");
  const auto r2 = invoke({"adjust", "--procedure", "lr", "--pvalues", two, "--zeta", "0.05"});
  CHECK(r2.out == "id,pvalue,adjusted_pvalue,rejected\nh1,0.01,0.02,true\nh2,0.5,0.5,false\n");

  SUBCASE("usage errors exit 1") {
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"adjust", "--pvalues", two}).code == 1);
    CHECK(invoke({"adjust", "--procedure", "nope", "--pvalues", two}).code == 1);
    CHECK(invoke({"adjust", "--procedure", "hlr", "--pvalues", two}).code == 1);
    CHECK(invoke({"adjust", "--procedure", "wlr-am", "--pvalues", two}).code == 1);
    CHECK(invoke({"adjust", "--procedure", "lr", "--pvalues", two, "--counts", two}).code == 1);
    CHECK(invoke({"adjust", "--procedure", "lr", "--pvalues", two, "--zeta", "1.5"}).code == 1);
    CHECK(invoke({"--help"}).code == 0);
  }
  SUBCASE("data errors exit 2") {
    const auto bad = s.write("bad.csv", "id,pvalue\nh1,zero\n");
    const auto e = invoke({"adjust", "--procedure", "lr", "--pvalues", bad});
    CHECK(e.code == 2);
    CHECK(e.err.find("line 2") != std::string::npos);
    const auto w = s.write("w.csv", "id,weight\nh1,1\n");
    CHECK(invoke({"adjust", "--procedure", "wgr-gm", "--pvalues", two, "--weights", w}).code == 2);
    CHECK(invoke({"adjust", "--procedure", "lr", "--pvalues", s.path("missing.csv")}).code == 2);
  }
  SUBCASE("weights") {
    const auto w = s.write("w.csv", "id,weight\nh1,2\nh2,0\n");
    const auto e = invoke({"adjust", "--procedure", "wgr-gm", "--pvalues", two, "--weights", w, "--zeta", "0.5"});
    CHECK(e.code == 0);
    CHECK(e.out.find("h2,0.5,1,false") != std::string::npos);
  }
  SUBCASE("off-support p-values warn and proceed") {
    const auto cdfs = s.write("c.csv", "id,support,cum\nh1,0.02;1,0.02;1\nh2,0.5;1,0.5;1\n");
    const auto e = invoke({"adjust", "--procedure", "hlr", "--pvalues", two, "--cdfs", cdfs});
    CHECK(e.code == 0);
    CHECK(e.err.find("warning") != std::string::npos);
  }
}

TEST_CASE("fisher-cdf") {
  Scratch s;
  const auto counts = s.write("counts.csv", "id,x1,n1,x2,n2\nr1,1,1,0,1\nr2,3,3,0,3\nr3,0,5,0,5\n");
  const auto r = invoke({"fisher-cdf", "--counts", counts, "--sided", "two", "--out", s.path("cdf.csv"),
                      "--pvalues-out", s.path("p.csv")});
  CHECK(r.code == 0);
  CHECK(slurp(s.path("cdf.csv")) == "id,support,cum\nr1,1,1\nr2,0.1;1,0.1;1\nr3,1,1\n");
  const auto p = io::read_pvalues_file(s.path("p.csv"));
  CHECK(p.values[0] == 1.0);
  CHECK(p.values[1] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(p.values[2] == 1.0);

  const auto bad = s.write("bad.csv", "id,x1,n1,x2,n2\nr1,1,1,0,1\nr2,4,3,0,3\n");
  const auto e = invoke({"fisher-cdf", "--counts", bad});
  CHECK(e.code == 2);
  CHECK(e.err.find("line 3") != std::string::npos);
}

TEST_CASE("fisher-cdf output round-trips through adjust") {
  Scratch s;
  const auto counts = s.write("counts.csv", kCounts);
  for (const char* sided : {"one", "two"}) {
    REQUIRE(invoke({"fisher-cdf", "--counts", counts, "--sided", sided, "--out", s.path("cdf.csv"), "--pvalues-out",
                 s.path("p.csv")})
                .code == 0);
    for (const char* proc : {"hgr", "pb", "hlr", "hgr-na"}) {
      const auto direct = invoke({"adjust", "--procedure", proc, "--counts", counts, "--sided", sided, "--zeta", "0.3",
                               "--alpha", "0.2"});
      const auto via = invoke({"adjust", "--procedure", proc, "--pvalues", s.path("p.csv"), "--cdfs", s.path("cdf.csv"),
                            "--zeta", "0.3", "--alpha", "0.2"});
      CHECK(direct.code == 0);
      CHECK(direct.out == via.out);
      CHECK(via.err.find("warning") == std::string::npos);
    }
  }
}

TEST_CASE("curve") {
  Scratch s;
  const auto counts = s.write("counts.csv", kCounts);
  const auto r = invoke({"curve", "--procedure", "lr,hgr,pb", "--counts", counts, "--zeta-grid", "0.05:0.95:0.05",
                      "--alpha", "0.2", "--out", s.path("curve.csv")});
  REQUIRE(r.code == 0);
  std::istringstream in(slurp(s.path("curve.csv")));
  std::string line;
  std::getline(in, line);
  CHECK(line == "procedure,zeta,rejections");
  std::string prev_proc;
  long prev_count = -1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const auto f = io::split(line, ',');
    const std::string proc(f[0]);
    const long count = static_cast<long>(io::parse_int(f[2]));
    if (proc == prev_proc) CHECK(count >= prev_count);
    prev_proc = proc;
    prev_count = count;
    const auto a = invoke({"adjust", "--procedure", proc, "--counts", counts, "--alpha", "0.2", "--zeta",
                        std::string(f[1]), "--out", s.path("a.csv")});
    CHECK(a.out.rfind("rejected " + std::to_string(count) + " of 7", 0) == 0);
  }
  CHECK(rows == 3 * 19);

  const auto empty = invoke({"curve", "--procedure", "lr", "--counts", counts, "--zeta-grid", "0.5:0.4:0.1"});
  CHECK(empty.code == 0);
  CHECK(empty.out == "procedure,zeta,rejections\n");
  CHECK(invoke({"curve", "--procedure", "lr", "--counts", counts, "--zeta-grid", "0:0.5:0.1"}).code == 1);
  CHECK(invoke({"curve", "--procedure", "lr", "--counts", counts, "--zeta-grid", "0.1:0.5"}).code == 1);
}

TEST_CASE("zeta grid parsing") {
  const auto g = cli::parse_zeta_grid("0.1:0.9:0.2");
  REQUIRE(g.size() == 5);
  CHECK(g[1] == 0.3);
  CHECK(g[4] == 0.9);
  CHECK(cli::parse_zeta_grid("0.5:0.5:0.1") == std::vector<double>{0.5});
}

TEST_CASE("simulate") {
  Scratch s;
  const auto cfg = s.write("sim.cfg", "m = 60\nm1 = 12\nm3 = 12\nreplicates = 12\n");
  const auto a = invoke({"simulate", "--config", cfg, "--seed", "5", "--out", s.path("a.csv")});
  const auto b = invoke({"simulate", "--config", cfg, "--seed", "5", "--threads", "3", "--out", s.path("b.csv")});
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(slurp(s.path("a.csv")) == slurp(s.path("b.csv")));
  CHECK(a.err.find("12/12") != std::string::npos);
  const auto text = slurp(s.path("a.csv"));
  CHECK(text.rfind("scenario,m,m1,m2,m3,q3,N,alpha,zeta,replicates,seed,procedure,mean_tdp", 0) == 0);
  CHECK(text.find(",DGR,") != std::string::npos);

  CHECK(invoke({"simulate", "--config", cfg, "--set", "replicates=0"}).code == 1);
  CHECK(invoke({"simulate", "--config", cfg, "--set", "colour=blue"}).code == 1);
  CHECK(invoke({"simulate", "--config", cfg, "--procedures", "bh,xyz"}).code == 1);
  const auto c = invoke({"simulate", "--config", cfg, "--procedures", "bh,dgr-na", "--set", "replicates=3"});
  CHECK(c.code == 0);
  CHECK(c.out.find(",DGR-NA,") != std::string::npos);
}
