#include "stochalign_cli/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "stochalign/heuristics.hpp"
#include "stochalign/io.hpp"
#include "stochalign/oracle.hpp"
#include "stochalign/search.hpp"

namespace stochalign::cli {

namespace {

struct AlignArgs {
  std::string model;
  std::string trace;
  std::string trace_file;
  double alpha = 1.0;
  std::string format = "table";
  std::size_t node_budget = 5'000'000;
  std::int64_t cap = 0;
  bool rational = false;
  bool no_timing = false;
};

struct ParetoArgs {
  std::string model;
  std::string trace;
  std::size_t max_len = 32;
};

struct BenchArgs {
  std::string model;
  std::string log;
  std::string alphas = "0.1,0.5,0.9";
  std::size_t repeat = 1;
  std::string csv;
  std::size_t threads = 1;
  std::size_t node_budget = 5'000'000;
};

std::vector<double> parse_alphas(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !(v >= 0.0 && v <= 1.0))
      throw CLI::ValidationError("--alphas", "'" + item + "' is not a number in [0, 1]");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--alphas", "at least one value is required");
  return out;
}

Trace load_trace(const AlignArgs& a) {
  if (a.trace_file.empty()) return io::parse_trace(a.trace);
  const auto traces = io::parse_log(io::read_file(a.trace_file));
  if (traces.size() > 1) throw Error("'" + a.trace_file + "' holds " + std::to_string(traces.size()) + " traces, expected one");
  return traces.empty() ? Trace{} : traces.front();
}

int do_align(const AlignArgs& a, std::ostream& out, std::ostream& err) {
  const auto net = io::read_slpn_file(a.model);
  const auto trace = load_trace(a);
  SearchConfig config;
  config.alpha = a.alpha;
  config.node_budget = a.node_budget;
  config.rational = a.rational;
  if (a.cap > 0) config.heuristic.cap = a.cap;

  const SyncProduct sp(trace, net);
  const HeuristicModel model(sp, config.heuristic);
  io::ReportConfig echo{a.alpha, model.cap(), a.node_budget, a.rational};
  try {
    auto result = stochastic_alignment(sp, config);
    if (a.no_timing) result.stats.runtime_ms = 0.0;
    out << io::render(io::make_report(sp, result.alignment, result.stats, echo),
                      a.format == "json" ? io::Format::Json : io::Format::Table);
    return Ok;
  } catch (const BudgetExceededError& e) {
    err << "error: " << e.what() << "\n";
    if (e.incumbent())
      err << "best incumbent (not proven optimal): cost " << e.incumbent()->cost << ", loss " << e.incumbent()->loss
          << "\n";
    return BudgetExceeded;
  } catch (const NoDeadlockError& e) {
    err << "error: " << e.what() << "\n";
    return InputError;
  }
}

int do_pareto(const ParetoArgs& a, std::ostream& out, std::ostream& err) {
  const auto net = io::read_slpn_file(a.model);
  const auto trace = io::parse_trace(a.trace);
  oracle::EnumerationBudget budget;
  budget.max_path_len = a.max_len;
  const auto front = oracle::pareto_front(net, trace, budget);
  if (front.truncated) err << "warning: enumeration hit a budget limit; the front may be incomplete\n";
  out << "distance\tprobability\tlog10_probability\tpath\n";
  for (const auto& e : front.entries) {
    std::string path;
    for (auto t : e.path.transitions) path += (path.empty() ? "" : ",") + net.transition(t).name;
    out << e.distance << '\t' << format_rational(e.probability) << '\t' << e.log10_probability << "\t<" << path
        << ">\n";
  }
  return Ok;
}

int do_validate(const std::string& model, std::ostream& out) {
  const auto net = io::read_slpn_file(model);
  std::size_t silent = 0;
  for (const auto& t : net.transitions()) silent += t.silent() ? 1 : 0;
  out << "ok: " << net.num_places() << " places, " << net.num_transitions() << " transitions (" << silent
      << " silent), " << net.initial_marking().total() << " initial tokens\n";
  return Ok;
}

int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const auto net = io::read_slpn_file(a.model);
  const auto log = io::parse_log(io::read_file(a.log));
  io::BenchOptions options;
  options.alphas = parse_alphas(a.alphas);
  options.repeat = a.repeat;
  options.threads = a.threads;
  options.search.node_budget = a.node_budget;
  const auto rows = io::run_bench(net, log, options);

  std::ofstream csv(a.csv);
  if (!csv) throw Error("cannot write '" + a.csv + "'");
  io::write_bench_csv(csv, rows);

  std::size_t budget = 0, failed = 0;
  for (const auto& r : rows) {
    budget += r.status == "budget";
    failed += r.status == "error";
  }
  out << rows.size() << " rows written to " << a.csv << "\n";
  if (failed) err << failed << " alignments failed\n";
  if (budget) {
    err << budget << " alignments exceeded the node budget\n";
    return BudgetExceeded;
  }
  return failed ? InputError : Ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic conformance checking: optimal alignments between traces and stochastic Petri nets"};
  app.name(args.empty() ? "stochalign" : args.front());
  app.require_subcommand(1);

  AlignArgs align;
  auto* align_cmd = app.add_subcommand("align", "Compute an optimal stochastic alignment");
  align_cmd->add_option("--model", align.model, "Net file")->required();
  auto* trace_opt = align_cmd->add_option("--trace", align.trace, "Comma-separated trace");
  auto* trace_file_opt =
      align_cmd->add_option("--trace-file", align.trace_file, "File holding one trace");
  trace_opt->excludes(trace_file_opt);
  align_cmd->add_option("--alpha", align.alpha, "Balance factor in [0, 1]")->required()->check(CLI::Range(0.0, 1.0));
  align_cmd->add_option("--format", align.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();
  align_cmd->add_option("--node-budget", align.node_budget, "Maximum node expansions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  align_cmd->add_option("--cap", align.cap, "Per-transition cap of the heuristic programs")
      ->check(CLI::PositiveNumber);
  align_cmd->add_flag("--rational", align.rational, "Report the exact probability");
  align_cmd->add_flag("--no-timing", align.no_timing, "Report runtime as 0 for reproducible output");

  ParetoArgs pareto;
  auto* pareto_cmd = app.add_subcommand("pareto", "Enumerate model paths and print the Pareto front");
  pareto_cmd->add_option("--model", pareto.model, "Net file")->required();
  pareto_cmd->add_option("--trace", pareto.trace, "Comma-separated trace")->required();
  pareto_cmd->add_option("--max-len", pareto.max_len, "Longest enumerated path")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string validate_model;
  auto* validate_cmd = app.add_subcommand("validate", "Parse and check a net file");
  validate_cmd->add_option("--model", validate_model, "Net file")->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time alignments of every trace of a log");
  bench_cmd->add_option("--model", bench.model, "Net file")->required();
  bench_cmd->add_option("--log", bench.log, "One trace per line")->required();
  bench_cmd->add_option("--alphas", bench.alphas, "Comma-separated balance factors")->capture_default_str();
  bench_cmd->add_option("--repeat", bench.repeat, "Runs per trace and alpha")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--csv", bench.csv, "Output CSV")->required();
  bench_cmd->add_option("--threads", bench.threads, "Concurrent searches")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--node-budget", bench.node_budget, "Maximum node expansions per alignment")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (*align_cmd && align.trace_file.empty() && trace_opt->count() == 0)
      throw CLI::RequiredError("--trace or --trace-file");
    if (*bench_cmd) parse_alphas(bench.alphas);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return Usage;
  }

  try {
    if (*align_cmd) return do_align(align, out, err);
    if (*pareto_cmd) return do_pareto(pareto, out, err);
    if (*validate_cmd) return do_validate(validate_model, out);
    return do_bench(bench, out, err);
  } catch (const Error& e) {
    err << "input error: " << e.what() << "\n";
    return InputError;
  }
}

}  // namespace stochalign::cli
