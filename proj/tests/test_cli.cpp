#include <gtest/gtest.h>

#include <clocale>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drh/cli.hpp"

using namespace drh;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / (std::string("drh-cli-test-") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "drh");
    if (args.size() > 1 && args[1] != "--help") {
      args.push_back("--cache-dir");
      args.push_back((dir_ / "cache").string());
    }
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

}  // namespace

TEST(Parse, ComplexNumbers) {
  EXPECT_EQ(cli::parse_complex("0.5+14.1347i"), cplx(0.5, 14.1347));
  EXPECT_EQ(cli::parse_complex("0.5"), cplx(0.5, 0));
  EXPECT_EQ(cli::parse_complex("-2i"), cplx(0, -2));
  EXPECT_EQ(cli::parse_complex("1e-3-2.5e2i"), cplx(1e-3, -250));
  EXPECT_EQ(cli::parse_complex(" 1 - i "), cplx(1, -1));
  EXPECT_THROW(cli::parse_complex("abc"), ArgumentError);
  EXPECT_THROW(cli::parse_complex(""), ArgumentError);
  const cplx z(0.1, -1.0 / 3);
  EXPECT_EQ(cli::parse_complex(cli::format_complex(z)), z);
}

TEST(Parse, Scalars) {
  EXPECT_EQ(cli::parse_double("limit", "1e6"), 1e6);
  EXPECT_THROW(cli::parse_double("limit", "1e6x"), ArgumentError);
  EXPECT_THROW(cli::parse_double("limit", "nan"), ArgumentError);
  EXPECT_EQ(cli::parse_int("a", "-1"), -1);
  EXPECT_THROW(cli::parse_int("a", "1.5"), ArgumentError);
  EXPECT_THROW(cli::parse_uint("q", "-3"), ArgumentError);
}

TEST(Config, CanonicalRoundTrip) {
  cli::RunConfig c;
  c.command = "drh-verify";
  c.limit = 12345678;
  c.checkpoints = 17;
  c.s = {0.5, 14.134725141734693};
  c.cache_dir = "/tmp/x y";
  c.threads = 4;
  c.out = "a.csv";
  c.json = "-";
  c.tolerance = 0.01;
  c.spec = "dirichlet:q=7:idx=3";
  c.q = 7;
  c.a = -1;
  c.b = 5;
  c.weight = 1.0 / 3;
  c.modulus = "2,1,0,1";
  c.character = 5;
  c.lmax = 9;
  c.dmax = 11;
  c.r = 2;
  c.target = cplx(0.25, -0.5);
  c.expect_rank = 1;
  c.inputs = {"a.json", "b.json"};
  const auto text = cli::canonical(c);
  EXPECT_EQ(cli::parse_canonical(text), c);
  EXPECT_EQ(cli::canonical(cli::parse_canonical(text)), text);

  cli::RunConfig d;
  d.command = "sieve";
  EXPECT_EQ(cli::parse_canonical(cli::canonical(d)), d);
}

TEST(Config, FileSyntax) {
  cli::RunConfig c;
  cli::parse_config_text("# comment\nlimit = 2000\n\nq=5   # trailing\n", c);
  EXPECT_EQ(c.limit, 2000);
  EXPECT_EQ(c.q, 5u);
  try {
    cli::parse_config_text("limit = 10\nbogus = 1\n", c);
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(cli::parse_config_text("limit 10\n", c), ArgumentError);
  EXPECT_THROW(cli::parse_config_text("threads = 0\n", c), ArgumentError);
}

TEST(Config, Validation) {
  cli::RunConfig c;
  c.command = "sieve";
  c.cache_dir = "x";
  EXPECT_NO_THROW(cli::validate(c));
  auto bad = [&](auto mutate) {
    cli::RunConfig d = c;
    mutate(d);
    EXPECT_THROW(cli::validate(d), ArgumentError);
  };
  bad([](cli::RunConfig& d) { d.command = "frobnicate"; });
  bad([](cli::RunConfig& d) { d.limit = 1.5; });
  bad([](cli::RunConfig& d) { d.limit = 1; });
  bad([](cli::RunConfig& d) { d.limit = 1e13; });
  bad([](cli::RunConfig& d) { d.checkpoints = 0; });
  bad([](cli::RunConfig& d) { d.tolerance = -1; });
  bad([](cli::RunConfig& d) { d.weight = -0.5; });
  bad([](cli::RunConfig& d) { d.lmax = 0; });
  bad([](cli::RunConfig& d) { d.r = 4; });
  bad([](cli::RunConfig& d) {
    d.command = "tau-bias";
    d.limit = 2e6;
  });
  bad([](cli::RunConfig& d) { d.command = "report"; });
}

TEST_F(CliTest, SieveExample) {
  const auto r = run({"sieve", "--limit", "1000"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_EQ(r.out, "168 primes\n");
  EXPECT_TRUE(fs::exists(dir_ / "cache" / "primes-1000.drhp"));
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
  std::ofstream(path("run.cfg")) << "command = race\nlimit = 5000\n";
  const auto r = run({"sieve", "--config", path("run.cfg"), "--limit", "1000"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "168 primes\n");
  const auto f = run({"sieve", "--config", path("run.cfg")});
  EXPECT_EQ(f.out, "669 primes\n");
}

TEST_F(CliTest, DistinctDiagnostics) {
  const auto unknown = run({"frobnicate"});
  EXPECT_EQ(unknown.code, cli::kExitError);
  EXPECT_NE(unknown.err.find("unknown command 'frobnicate'"), std::string::npos);

  const auto unwritable = run({"race", "--limit", "1e5", "--out", path("missing/dir/x.csv")});
  EXPECT_EQ(unwritable.code, cli::kExitError);
  EXPECT_NE(unwritable.err.find("cannot open output"), std::string::npos);

  ASSERT_EQ(run({"sieve", "--limit", "1000"}).code, 0);
  {
    std::fstream f(dir_ / "cache" / "primes-1000.drhp", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(20);
    f.put('\x7f');
  }
  const auto corrupt = run({"sieve", "--limit", "1000"});
  EXPECT_EQ(corrupt.code, cli::kExitError);
  EXPECT_NE(corrupt.err.find("cache error"), std::string::npos);
  EXPECT_NE(corrupt.err.find("checksum"), std::string::npos);

  const auto badflag = run({"sieve", "--limit", "ten"});
  EXPECT_EQ(badflag.code, cli::kExitError);
  EXPECT_NE(badflag.err.find("limit"), std::string::npos);

  const auto nocurve = run({"bsd", "--a", "0", "--b", "0", "--limit", "1000"});
  EXPECT_EQ(nocurve.code, cli::kExitError);
  EXPECT_NE(nocurve.err.find("singular"), std::string::npos);
}

TEST_F(CliTest, RaceExample) {
  const auto r = run({"race", "--q", "4", "--b", "3", "--a", "1", "--weight", "0.5", "--limit", "1e6", "--out", path("race.csv"),
                      "--json", path("race.json")});
  EXPECT_EQ(r.code, 0);
  const auto csv = slurp(path("race.csv"));
  EXPECT_EQ(csv.substr(0, 16), "x,value,loglogx\n");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 65);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  const auto j = report::json::parse(slurp(path("race.json")));
  EXPECT_EQ(j["kind"], "race");
  EXPECT_EQ(j["checkpoints"].size(), 64u);
  EXPECT_TRUE(j["verdict"]["pass"].get<bool>());
  EXPECT_GT(j["classical_density"].get<double>(), 0.9);
}

TEST_F(CliTest, FfTraceExample) {
  const auto r = run({"ff-trace", "--q", "3", "--modulus", "1,0,1", "--char", "1", "--lmax", "12"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("max residual ", 0), 0u);
}

TEST_F(CliTest, BsdExample) {
  const auto r = run({"bsd", "--a", "-1", "--b", "0", "--limit", "100000", "--out", path("bsd.csv"), "--json", path("bsd.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(slurp(path("bsd.csv")).substr(0, 34), "x,re_logP,im_logP,re_norm,im_norm\n");
  const auto j = report::json::parse(slurp(path("bsd.json")));
  EXPECT_EQ(j["label"], "ec:a=-1:b=0");
  EXPECT_EQ(j["disc"], "64");
  EXPECT_LT(j["split_form_difference"].get<double>(), 1e-12);
}

TEST_F(CliTest, VerdictFailureExitsTwo) {
  // a deliberately impossible tolerance
  const auto r = run({"drh-verify", "--spec", "dirichlet:q=4:idx=1", "--limit", "1e5", "--tolerance", "1e-9"});
  EXPECT_EQ(r.code, cli::kExitVerdict);
  const auto j = report::json::parse(r.out);
  EXPECT_FALSE(j["verdict"]["pass"].get<bool>());

  ASSERT_EQ(run({"tau-bias", "--limit", "1e5", "--json", path("t.json"), "--out", path("t.csv")}).code, 0);
  std::ofstream(path("failed.json")) << j.dump();
  const auto rep = run({"report", "--in", path("t.json"), "--in", path("failed.json")});
  EXPECT_EQ(rep.code, cli::kExitVerdict);
  EXPECT_NE(rep.out.find("tau_bias tau pass"), std::string::npos);
  EXPECT_NE(rep.out.find("convergence dirichlet:q=4:idx=1 fail"), std::string::npos);
}

TEST_F(CliTest, TargetRequiredWithoutReferenceValue) {
  const auto r = run({"drh-verify", "--spec", "delta", "--limit", "1e4"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--target"), std::string::npos);
  const auto z = run({"drh-verify", "--spec", "zeta", "--limit", "1e4"});
  EXPECT_EQ(z.code, 1);
  EXPECT_NE(z.err.find("pole"), std::string::npos);
  const auto w = run({"drh-verify", "--spec", "zeta", "--s", "2", "--limit", "1e6", "--tolerance", "1e-6"});
  EXPECT_EQ(w.code, 0) << w.err;
}

TEST_F(CliTest, CsvIgnoresNumericLocale) {
  const char* locales[] = {"de_DE.UTF-8", "fr_FR.UTF-8", "de_DE", "C"};
  for (const char* l : locales)
    if (std::setlocale(LC_NUMERIC, l)) break;
  const auto r = run({"product", "--spec", "zeta", "--s", "2", "--limit", "1e4", "--checkpoints", "8"});
  std::setlocale(LC_NUMERIC, "C");
  EXPECT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,re_logP,im_logP,re_norm,im_norm");
  while (std::getline(in, line)) EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4) << line;
}
