#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochalign/errors.hpp"
#include "stochalign/net.hpp"
#include "stochalign/search.hpp"

namespace stochalign::io {

/// Parses the textual net format:
///
///   stochastic labeled petri net
///   places <n>
///   initial marking
///   <n integers>
///   transitions <m>
///   label <activity> | silent
///   weight <positive decimal or p/q>
///   inputs <0-based place indices>
///   outputs <0-based place indices>
///   ... (four lines per transition)
///
/// `#` starts a comment; `\#` and `\\` escape inside activity names. Repeated indices add arc
/// multiplicity. Places are named p1..pn and transitions t1..tm. Throws ParseError.
StochasticNet parse_slpn(std::string_view text);

/// Inverse of parse_slpn up to whitespace and comments. Weights are written exactly.
std::string serialize_slpn(const StochasticNet& net);

StochasticNet read_slpn_file(const std::string& path);

/// Comma-separated activities; `\,` and `\\` escape. Empty text is the empty trace.
Trace parse_trace(std::string_view text);
std::string format_trace(const Trace& trace);

/// One trace per line; blank lines and lines starting with `#` are skipped.
std::vector<Trace> parse_log(std::string_view text);

/// Reads a whole file. Throws Error when it cannot be opened.
std::string read_file(const std::string& path);

struct ReportRow {
  MoveKind kind;
  std::optional<Activity> trace_activity;
  std::optional<std::string> transition;  ///< model transition name
  std::optional<Activity> model_label;
  double gain = 1.0;
};

struct ReportConfig {
  double alpha = 1.0;
  std::int64_t cap = 0;
  std::size_t node_budget = 0;
  bool rational = false;
};

struct AlignmentReport {
  Alignment alignment;
  std::vector<ReportRow> rows;
  SearchStats stats;
  ReportConfig config;
};

AlignmentReport make_report(const SyncProduct& sp, const Alignment& alignment, const SearchStats& stats,
                            const ReportConfig& config);

enum class Format { Table, Json };

/// Table: two-row move grid (trace row over model row, ">>" for gaps) and a totals line.
/// Json: {alpha, cost, probability, log10_probability, loss, moves, stats}; deterministic bytes
/// for a given report.
std::string render(const AlignmentReport& report, Format format);

/// One CSV row of the bench command.
struct BenchRow {
  std::size_t trace_index = 0;
  std::size_t trace_length = 0;
  double alpha = 0.0;
  std::size_t repeat = 0;
  std::string status;  ///< ok, budget, error
  int cost = -1;
  double loss = 0.0;
  std::size_t expanded = 0;
  double runtime_ms = 0.0;
};

struct BenchOptions {
  std::vector<double> alphas{0.1, 0.5, 0.9};
  std::size_t repeat = 1;
  std::size_t threads = 1;
  SearchConfig search;  ///< alpha is overridden per row
};

/// Aligns every trace under every alpha `repeat` times. Rows are ordered by trace, alpha, repeat
/// regardless of the thread count.
std::vector<BenchRow> run_bench(const StochasticNet& net, const std::vector<Trace>& log, const BenchOptions& options);

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace stochalign::io
