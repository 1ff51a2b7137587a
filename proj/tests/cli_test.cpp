#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include "json.hpp"
#include <sstream>

#include "stochalign_cli/cli.hpp"
#include "support.hpp"

namespace stochalign::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "stochalign");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("stochalign_cli_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

const std::string model = test::data_file("n2.slpn");

TEST(Cli, AlignTable) {
  const auto r = invoke({"align", "--model", model, "--trace", "a,c", "--alpha", "0.5"});
  ASSERT_EQ(r.code, Ok) << r.err;
  EXPECT_NE(r.out.find("cost 0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("t1"), std::string::npos);
  EXPECT_NE(r.out.find("t3"), std::string::npos);
}

TEST(Cli, AlignJsonIsReproducible) {
  const std::vector<std::string> args{"align", "--model", model, "--trace", "a,d,c", "--alpha", "0.9",
                                      "--format", "json", "--no-timing", "--rational"};
  const auto a = invoke(args), b = invoke(args);
  ASSERT_EQ(a.code, Ok) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto doc = nlohmann::json::parse(a.out);
  EXPECT_EQ(doc["cost"].get<int>(), 1);
  EXPECT_EQ(doc["stats"]["runtime_ms"].get<double>(), 0.0);
  EXPECT_TRUE(doc.contains("exact_probability"));
}

TEST(Cli, AlignTraceFile) {
  const auto trace = scratch("trace.txt", "a,d,c\n");
  const auto r = invoke({"align", "--model", model, "--trace-file", trace, "--alpha", "1"});
  EXPECT_EQ(r.code, Ok) << r.err;
  EXPECT_NE(r.out.find("cost 1"), std::string::npos) << r.out;
}

TEST(Cli, Pareto) {
  const auto r = invoke({"pareto", "--model", model, "--trace", "a,d,c"});
  ASSERT_EQ(r.code, Ok) << r.err;
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "distance\tprobability\tlog10_probability\tpath");
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].substr(0, 2), "1\t");
  EXPECT_NE(rows[0].find("<t1,t3>"), std::string::npos);
}

TEST(Cli, Validate) {
  const auto ok = invoke({"validate", "--model", model});
  EXPECT_EQ(ok.code, Ok);
  EXPECT_EQ(ok.out.rfind("ok: 4 places, 4 transitions", 0), 0u) << ok.out;

  const auto bad = scratch("zero.slpn",
                           "stochastic labeled petri net\nplaces 1\ninitial marking\n1\ntransitions 1\n"
                           "label a\nweight 0\ninputs 0\noutputs\n");
  const auto r = invoke({"validate", "--model", bad});
  EXPECT_EQ(r.code, InputError);
  EXPECT_NE(r.err.find("line 7"), std::string::npos) << r.err;

  EXPECT_EQ(invoke({"validate", "--model", "/nonexistent/net.slpn"}).code, InputError);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, Usage);
  EXPECT_EQ(invoke({"frobnicate"}).code, Usage);
  EXPECT_EQ(invoke({"align", "--model", model, "--alpha", "0.5"}).code, Usage);
  EXPECT_EQ(invoke({"align", "--model", model, "--trace", "a", "--alpha", "1.5"}).code, Usage);
  EXPECT_EQ(invoke({"align", "--model", model, "--trace", "a", "--alpha", "0.5", "--format", "xml"}).code, Usage);
  EXPECT_EQ(invoke({"bench", "--model", model, "--log", model, "--csv", "x.csv", "--alphas", "0.2,oops"}).code,
            Usage);
}

TEST(Cli, BudgetExceeded) {
  const auto r =
      invoke({"align", "--model", model, "--trace", "a,d,c,b,d,c,a", "--alpha", "0.5", "--node-budget", "1"});
  EXPECT_EQ(r.code, BudgetExceeded) << r.out;
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, BenchWritesCsv) {
  const auto csv = (std::filesystem::temp_directory_path() / "stochalign_cli_test_bench.csv").string();
  const auto r = invoke({"bench", "--model", model, "--log", test::data_file("n2_log.txt"), "--alphas", "0,0.5,1",
                         "--repeat", "2", "--csv", csv});
  ASSERT_EQ(r.code, Ok) << r.err;
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "trace,length,alpha,repeat,status,cost,loss,expanded,runtime_ms");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 4u * 3u * 2u);

  const auto over = invoke({"bench", "--model", model, "--log", test::data_file("n2_log.txt"), "--node-budget", "1",
                            "--csv", csv});
  EXPECT_EQ(over.code, BudgetExceeded);
}

}  // namespace
}  // namespace stochalign::cli
