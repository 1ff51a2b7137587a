#include <gtest/gtest.h>

#include "json.hpp"
#include <random>
#include <sstream>

#include "stochalign/io.hpp"
#include "stochalign/oracle.hpp"
#include "support.hpp"

namespace stochalign::io {
namespace {

using test::adc;

TEST(ParseSlpn, RunningExampleFile) {
  const auto net = read_slpn_file(test::data_file("n2.slpn"));
  ASSERT_EQ(net.num_places(), 4u);
  ASSERT_EQ(net.num_transitions(), 4u);
  EXPECT_EQ(net.transition(1).weight, Rational(99));
  EXPECT_EQ(net.transition(1).name, "t2");
  const auto e = oracle::enumerate_paths(net);
  std::multiset<Rational> probs;
  for (const auto& p : e.paths) probs.insert(p.probability);
  EXPECT_EQ(probs, (std::multiset<Rational>{Rational(5, 500), Rational(297, 500), Rational(198, 500)}));
}

TEST(ParseSlpn, ZeroTransitions) {
  const auto net = parse_slpn("stochastic labeled petri net\nplaces 1\ninitial marking\n1\ntransitions 0\n");
  EXPECT_EQ(net.num_transitions(), 0u);
  EXPECT_TRUE(is_deadlock(net, net.initial_marking()));
}

TEST(ParseSlpn, Errors) {
  const std::string head = "stochastic labeled petri net\nplaces 2\ninitial marking\n1 0\ntransitions 1\n";
  const auto line_of = [](const std::string& text) {
    try {
      parse_slpn(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of(head + "label a\nweight 0\ninputs 0\noutputs 1\n"), 7u);
  EXPECT_EQ(line_of(head + "label a\nweight -2\ninputs 0\noutputs 1\n"), 7u);
  EXPECT_EQ(line_of(head + "label a\nweight 1\ninputs 0\noutputs 5\n"), 9u);
  EXPECT_EQ(line_of(head + "label a\nweight 1\ninputs 0\n"), 9u);
  EXPECT_EQ(line_of("stochastic net\n"), 1u);
  EXPECT_EQ(line_of("stochastic labeled petri net\nplaces 1\ninitial marking\n0\ntransitions 0\n"), 3u);
}

TEST(ParseSlpn, CommentsEscapesAndFractions) {
  const auto net = parse_slpn(
      "stochastic labeled petri net # header\n\nplaces 2\ninitial marking\n1 0\ntransitions 2\n"
      "label x\\#y\nweight 2/3\ninputs 0 0\noutputs 1\nsilent\nweight 0.25\ninputs 1\noutputs\n");
  EXPECT_EQ(net.transition(0).label, "x#y");
  EXPECT_EQ(net.transition(0).weight, Rational(2, 3));
  EXPECT_EQ(net.transition(0).inputs, (std::vector<Arc>{{0, 2}}));
  EXPECT_TRUE(net.transition(1).silent());
  EXPECT_EQ(net.transition(1).weight, Rational(1, 4));
}

TEST(SerializeSlpn, RoundTripOnGeneratedNets) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    gen::NetShape shape;
    shape.places = 2 + static_cast<std::size_t>(i % 15);
    shape.transitions = 1 + static_cast<std::size_t>(i % 18);
    const auto net = gen::random_block_net(rng, shape);
    const auto text = serialize_slpn(net);
    const auto back = parse_slpn(text);
    EXPECT_EQ(serialize_slpn(back), text);
    ASSERT_EQ(back.num_transitions(), net.num_transitions());
    for (TransitionId t = 0; t < static_cast<TransitionId>(net.num_transitions()); ++t) {
      EXPECT_EQ(back.transition(t).label, net.transition(t).label);
      EXPECT_EQ(back.transition(t).weight, net.transition(t).weight);
      EXPECT_EQ(back.transition(t).inputs, net.transition(t).inputs);
      EXPECT_EQ(back.transition(t).outputs, net.transition(t).outputs);
    }
    EXPECT_EQ(back.initial_marking(), net.initial_marking());
  }
}

TEST(ParseTrace, Examples) {
  EXPECT_EQ(parse_trace("a,d,c"), adc());
  EXPECT_EQ(parse_trace(""), Trace{});
  EXPECT_EQ(parse_trace("x\\,y,z"), (Trace{"x,y", "z"}));
  EXPECT_EQ(parse_trace(format_trace(Trace{"x,y", "a\\b", "c"})), (Trace{"x,y", "a\\b", "c"}));
}

TEST(ParseLog, SkipsCommentsAndBlankLines) {
  const auto log = parse_log("# header\na,b\n\nc\n# more\n");
  EXPECT_EQ(log, (std::vector<Trace>{{"a", "b"}, {"c"}}));
  EXPECT_EQ(parse_log(read_file(test::data_file("n2_log.txt"))).size(), 4u);
}

AlignmentReport running_report(double alpha) {
  const auto net = read_slpn_file(test::data_file("n2.slpn"));
  const SyncProduct sp(adc(), net);
  SearchConfig config;
  config.alpha = alpha;
  auto r = stochastic_alignment(sp, config);
  r.stats.runtime_ms = 0.0;
  return make_report(sp, r.alignment, r.stats, {alpha, 16, config.node_budget, false});
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string tok; in >> tok;)
    if (tok != "|") out.push_back(tok);
  return out;
}

TEST(Render, TableShowsTwoRowGrid) {
  const auto text = render(running_report(0.5), Format::Table);
  std::istringstream in(text);
  std::string top, bottom, totals;
  std::getline(in, top);
  std::getline(in, bottom);
  std::getline(in, totals);
  const auto t = cells(top), b = cells(bottom);
  ASSERT_EQ(t.size(), 5u);
  ASSERT_EQ(b.size(), 5u);
  // Expected columns; the first two moves may come in either order.
  std::multiset<std::pair<std::string, std::string>> columns, expected{{">>", "t2"}, {"a", ">>"}, {"d", "t4"}, {"c", "t3"}};
  for (std::size_t i = 1; i < t.size(); ++i) columns.insert({t[i], b[i]});
  EXPECT_EQ(columns, expected);
  EXPECT_NE(totals.find("cost 2"), std::string::npos);
}

TEST(Render, EmptyTracePerfectFit) {
  NetBuilder b;
  b.add_place("p", 1);
  const SyncProduct sp({}, b.build());
  const auto r = stochastic_alignment(sp, {});
  const auto text = render(make_report(sp, r.alignment, r.stats, {}), Format::Table);
  EXPECT_EQ(text.rfind("cost 0", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
}

TEST(Render, JsonValuesAndDeterminism) {
  const auto report = running_report(0.5);
  const auto text = render(report, Format::Json);
  EXPECT_EQ(text, render(running_report(0.5), Format::Json));
  const auto doc = nlohmann::json::parse(text);
  EXPECT_NEAR(doc["loss"].get<double>(), 0.818, 5e-4);
  EXPECT_EQ(doc["cost"].get<int>(), report.alignment.cost);
  EXPECT_NEAR(doc["loss"].get<double>(), report.alignment.loss, 1e-12);
  EXPECT_NEAR(doc["log10_probability"].get<double>(), report.alignment.log10_probability, 1e-12);
  EXPECT_NEAR(doc["probability"].get<double>(), report.alignment.probability, 1e-12);
  EXPECT_EQ(doc["moves"].size(), report.alignment.moves.size());
  EXPECT_EQ(doc["stats"]["expanded"].get<std::size_t>(), report.stats.expanded);
  for (const auto& mv : doc["moves"]) {
    EXPECT_TRUE(mv.contains("kind"));
    EXPECT_TRUE(mv.contains("activity"));
    EXPECT_TRUE(mv.contains("transition"));
  }
}

TEST(Bench, RowCountAndOrder) {
  const auto net = read_slpn_file(test::data_file("n2.slpn"));
  const auto log = parse_log(read_file(test::data_file("n2_log.txt")));
  BenchOptions options;
  options.alphas = {0.0, 1.0};
  options.repeat = 2;
  options.threads = 3;
  const auto rows = run_bench(net, log, options);
  ASSERT_EQ(rows.size(), log.size() * 2 * 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].trace_index, i / 4);
    EXPECT_EQ(rows[i].status, "ok");
  }
  std::ostringstream csv;
  write_bench_csv(csv, rows);
  const auto text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(rows.size() + 1));
}

}  // namespace
}  // namespace stochalign::io
