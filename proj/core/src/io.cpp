#include "stochalign/io.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace stochalign::io {

namespace {

struct Line {
  std::size_t number;
  std::string text;  // comment stripped, trimmed, escapes preserved
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string strip_comment(std::string_view raw) {
  std::string out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '\\' && i + 1 < raw.size()) {
      out += raw[i];
      out += raw[++i];
    } else if (raw[i] == '#') {
      break;
    } else {
      out += raw[i];
    }
  }
  return trim(out);
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) ++i;
    out += s[i];
  }
  return out;
}

std::string escape_label(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\\' || c == '#') out += '\\';
    out += c;
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) {
    std::size_t number = 0, pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++number;
      auto stripped = strip_comment(raw);
      if (!stripped.empty()) lines_.push_back({number, std::move(stripped)});
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    last_line_ = number;
  }

  bool done() const { return next_ >= lines_.size(); }

  const Line& take(const std::string& expecting) {
    if (done()) throw ParseError(last_line_, "unexpected end of input, expected " + expecting);
    return lines_[next_++];
  }

 private:
  std::vector<Line> lines_;
  std::size_t next_ = 0;
  std::size_t last_line_ = 0;
};

std::int64_t parse_int(const std::string& tok, std::size_t line, const std::string& what) {
  std::int64_t v = 0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ParseError(line, "expected an integer for " + what + ", got '" + tok + "'");
  return v;
}

/// "keyword rest..." with an exact keyword match; returns the remaining tokens.
std::vector<std::string> expect_keyword(const Line& line, const std::string& keyword) {
  auto toks = split_ws(line.text);
  if (toks.empty() || toks.front() != keyword)
    throw ParseError(line.number, "expected '" + keyword + "', got '" + line.text + "'");
  toks.erase(toks.begin());
  return toks;
}

Rational parse_weight(const std::string& tok, std::size_t line) {
  Rational w;
  try {
    const auto slash = tok.find('/');
    if (slash == std::string::npos) {
      w = parse_decimal(tok);
    } else {
      const Rational den = parse_decimal(tok.substr(slash + 1));
      if (den == 0) throw std::invalid_argument("zero denominator");
      w = parse_decimal(tok.substr(0, slash)) / den;
    }
  } catch (const std::invalid_argument&) {
    throw ParseError(line, "malformed weight '" + tok + "'");
  }
  if (w <= 0) throw ParseError(line, "weight must be positive, got '" + tok + "'");
  return w;
}

std::vector<Arc> parse_arcs(const std::vector<std::string>& toks, std::size_t line, std::int64_t places,
                            const std::string& what) {
  std::vector<Arc> arcs;
  for (const auto& tok : toks) {
    const auto p = parse_int(tok, line, what);
    if (p < 0 || p >= places)
      throw ParseError(line, what + " index " + tok + " is out of range for " + std::to_string(places) + " places");
    auto it = std::find_if(arcs.begin(), arcs.end(), [&](const Arc& a) { return a.place == p; });
    if (it == arcs.end())
      arcs.push_back({static_cast<PlaceId>(p), 1});
    else
      ++it->multiplicity;
  }
  return arcs;
}

}  // namespace

StochasticNet parse_slpn(std::string_view text) {
  LineReader reader(text);

  const auto& header = reader.take("header");
  std::string lowered = header.text;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (split_ws(lowered) != std::vector<std::string>{"stochastic", "labeled", "petri", "net"})
    throw ParseError(header.number, "expected header 'stochastic labeled petri net'");

  const auto& places_line = reader.take("'places <n>'");
  const auto pt = expect_keyword(places_line, "places");
  if (pt.size() != 1) throw ParseError(places_line.number, "expected 'places <n>'");
  const auto places = parse_int(pt[0], places_line.number, "place count");
  if (places < 0) throw ParseError(places_line.number, "place count must be non-negative");

  const auto& marking_line = reader.take("'initial marking'");
  auto tokens = split_ws(marking_line.text);
  if (tokens.size() < 2 || tokens[0] != "initial" || tokens[1] != "marking")
    throw ParseError(marking_line.number, "expected 'initial marking'");
  tokens.erase(tokens.begin(), tokens.begin() + 2);
  std::vector<std::int32_t> marking;
  std::size_t marking_at = marking_line.number;
  for (;;) {
    for (const auto& tok : tokens) {
      if (static_cast<std::int64_t>(marking.size()) >= places)
        throw ParseError(marking_at, "initial marking has more than " + std::to_string(places) + " entries");
      const auto v = parse_int(tok, marking_at, "token count");
      if (v < 0 || v > std::numeric_limits<std::int32_t>::max())
        throw ParseError(marking_at, "token count out of range: " + tok);
      marking.push_back(static_cast<std::int32_t>(v));
    }
    if (static_cast<std::int64_t>(marking.size()) == places) break;
    const auto& more = reader.take("initial marking entries");
    marking_at = more.number;
    tokens = split_ws(more.text);
  }
  if (std::all_of(marking.begin(), marking.end(), [](std::int32_t v) { return v == 0; }))
    throw ParseError(marking_line.number, "initial marking must hold at least one token");

  const auto& transitions_line = reader.take("'transitions <m>'");
  const auto tt = expect_keyword(transitions_line, "transitions");
  if (tt.size() != 1) throw ParseError(transitions_line.number, "expected 'transitions <m>'");
  const auto count = parse_int(tt[0], transitions_line.number, "transition count");
  if (count < 0) throw ParseError(transitions_line.number, "transition count must be non-negative");

  std::vector<Transition> transitions;
  for (std::int64_t i = 0; i < count; ++i) {
    Transition t;
    t.name = "t" + std::to_string(i + 1);
    const auto& kind = reader.take("'label <activity>' or 'silent' for " + t.name);
    if (kind.text == "silent") {
      t.label.reset();
    } else if (kind.text.rfind("label", 0) == 0 && kind.text.size() > 5 &&
               std::isspace(static_cast<unsigned char>(kind.text[5]))) {
      t.label = unescape(trim(std::string_view(kind.text).substr(6)));
      if (t.label->empty()) throw ParseError(kind.number, "empty activity label");
    } else {
      throw ParseError(kind.number, "expected 'label <activity>' or 'silent', got '" + kind.text + "'");
    }
    const auto& weight_line = reader.take("'weight <w>' for " + t.name);
    const auto wt = expect_keyword(weight_line, "weight");
    if (wt.size() != 1) throw ParseError(weight_line.number, "expected exactly one weight");
    t.weight = parse_weight(wt[0], weight_line.number);
    const auto& in_line = reader.take("'inputs ...' for " + t.name);
    t.inputs = parse_arcs(expect_keyword(in_line, "inputs"), in_line.number, places, "input place");
    const auto& out_line = reader.take("'outputs ...' for " + t.name);
    t.outputs = parse_arcs(expect_keyword(out_line, "outputs"), out_line.number, places, "output place");
    transitions.push_back(std::move(t));
  }
  if (!reader.done()) {
    const auto& extra = reader.take("");
    throw ParseError(extra.number, "unexpected content after the last transition: '" + extra.text + "'");
  }

  std::vector<std::string> names;
  for (std::int64_t p = 0; p < places; ++p) names.push_back("p" + std::to_string(p + 1));
  return StochasticNet(std::move(names), std::move(transitions), Marking(std::move(marking)));
}

std::string serialize_slpn(const StochasticNet& net) {
  std::ostringstream out;
  out << "stochastic labeled petri net\n";
  out << "places " << net.num_places() << "\n";
  out << "initial marking\n";
  const auto tokens = net.initial_marking().tokens();
  for (std::size_t p = 0; p < tokens.size(); ++p) out << (p ? " " : "") << tokens[p];
  out << "\n";
  out << "transitions " << net.num_transitions() << "\n";
  const auto arcs = [&](const char* keyword, const std::vector<Arc>& list) {
    out << keyword;
    for (const auto& a : list)
      for (std::int32_t k = 0; k < a.multiplicity; ++k) out << " " << a.place;
    out << "\n";
  };
  for (const auto& t : net.transitions()) {
    out << "# " << t.name << "\n";
    if (t.label)
      out << "label " << escape_label(*t.label) << "\n";
    else
      out << "silent\n";
    out << "weight " << format_rational(t.weight) << "\n";
    arcs("inputs", t.inputs);
    arcs("outputs", t.outputs);
  }
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

StochasticNet read_slpn_file(const std::string& path) { return parse_slpn(read_file(path)); }

Trace parse_trace(std::string_view text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
  Trace out;
  if (text.empty()) return out;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      current += text[++i];
    } else if (text[i] == ',') {
      out.push_back(std::move(current));
      current.clear();
    } else {
      current += text[i];
    }
  }
  out.push_back(std::move(current));
  return out;
}

std::string format_trace(const Trace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i) out += ',';
    for (char c : trace[i]) {
      if (c == ',' || c == '\\') out += '\\';
      out += c;
    }
  }
  return out;
}

std::vector<Trace> parse_log(std::string_view text) {
  std::vector<Trace> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    if (trim(line).empty() || line.front() == '#') continue;
    out.push_back(parse_trace(line));
  }
  return out;
}

AlignmentReport make_report(const SyncProduct& sp, const Alignment& alignment, const SearchStats& stats,
                            const ReportConfig& config) {
  AlignmentReport report{alignment, {}, stats, config};
  for (const auto& mv : alignment.moves) {
    ReportRow row;
    row.kind = mv.kind;
    row.gain = mv.gain;
    if (mv.trace_position) row.trace_activity = sp.trace()[*mv.trace_position];
    if (mv.model_transition) {
      const auto& t = sp.model().transition(*mv.model_transition);
      row.transition = t.name;
      row.model_label = t.label;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string render_table(const AlignmentReport& r) {
  std::ostringstream out;
  const auto& rows = r.rows;
  if (!rows.empty()) {
    std::vector<std::string> top{"trace"}, bottom{"model"};
    for (const auto& row : rows) {
      top.push_back(row.trace_activity.value_or(">>"));
      bottom.push_back(row.transition.value_or(">>"));
    }
    std::vector<std::size_t> width(top.size());
    for (std::size_t i = 0; i < top.size(); ++i) width[i] = std::max(top[i].size(), bottom[i].size());
    for (const auto* line : {&top, &bottom}) {
      for (std::size_t i = 0; i < line->size(); ++i) {
        out << (i ? " | " : "") << (*line)[i];
        if (i + 1 < line->size()) out << std::string(width[i] - (*line)[i].size(), ' ');
      }
      out << "\n";
    }
  }
  const auto& a = r.alignment;
  out << "cost " << a.cost << "  probability ";
  out << (a.exact_probability ? format_rational(*a.exact_probability) : format_real(a.probability));
  out << "  log10_probability " << format_real(a.log10_probability) << "  loss " << format_real(a.loss)
      << "  alpha " << format_real(a.alpha) << "  expanded " << r.stats.expanded << "  runtime_ms "
      << format_real(r.stats.runtime_ms) << "\n";
  return out.str();
}

std::string render_json(const AlignmentReport& r) {
  using nlohmann::ordered_json;
  const auto& a = r.alignment;
  ordered_json doc;
  doc["alpha"] = a.alpha;
  doc["cost"] = a.cost;
  doc["probability"] = a.probability;
  doc["log10_probability"] = a.log10_probability;
  doc["loss"] = a.loss;
  if (a.exact_probability) doc["exact_probability"] = format_rational(*a.exact_probability);
  ordered_json moves = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json mv;
    mv["kind"] = std::string(to_string(row.kind));
    const auto activity = row.trace_activity ? row.trace_activity : row.model_label;
    mv["activity"] = activity ? ordered_json(*activity) : ordered_json(nullptr);
    mv["transition"] = row.transition ? ordered_json(*row.transition) : ordered_json(nullptr);
    moves.push_back(std::move(mv));
  }
  doc["moves"] = std::move(moves);
  doc["stats"] = {{"expanded", r.stats.expanded}, {"runtime_ms", r.stats.runtime_ms}};
  return doc.dump(2) + "\n";
}

}  // namespace

std::string render(const AlignmentReport& report, Format format) {
  return format == Format::Json ? render_json(report) : render_table(report);
}

std::vector<BenchRow> run_bench(const StochasticNet& net, const std::vector<Trace>& log, const BenchOptions& options) {
  struct Job {
    std::size_t trace, alpha, repeat;
  };
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < log.size(); ++t)
    for (std::size_t a = 0; a < options.alphas.size(); ++a)
      for (std::size_t k = 0; k < options.repeat; ++k) jobs.push_back({t, a, k});

  std::vector<BenchRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      BenchRow row;
      row.trace_index = job.trace;
      row.trace_length = log[job.trace].size();
      row.alpha = options.alphas[job.alpha];
      row.repeat = job.repeat;
      SearchConfig config = options.search;
      config.alpha = row.alpha;
      config.on_expand = nullptr;
      try {
        const auto result = stochastic_alignment(net, log[job.trace], config);
        row.status = "ok";
        row.cost = result.alignment.cost;
        row.loss = result.alignment.loss;
        row.expanded = result.stats.expanded;
        row.runtime_ms = result.stats.runtime_ms;
      } catch (const BudgetExceededError& e) {
        row.status = "budget";
        row.expanded = e.stats().expanded;
        row.runtime_ms = e.stats().runtime_ms;
      } catch (const Error&) {
        row.status = "error";
      }
      rows[i] = row;
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, jobs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::string bench_csv_header() { return "trace,length,alpha,repeat,status,cost,loss,expanded,runtime_ms"; }

std::string bench_csv_row(const BenchRow& row) {
  std::ostringstream out;
  out << row.trace_index << ',' << row.trace_length << ',' << format_real(row.alpha) << ',' << row.repeat << ','
      << row.status << ',' << row.cost << ',';
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", row.loss);
  out << buf << ',' << row.expanded << ',';
  std::snprintf(buf, sizeof buf, "%.3f", row.runtime_ms);
  out << buf;
  return out.str();
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << bench_csv_header() << "\n";
  for (const auto& row : rows) out << bench_csv_row(row) << "\n";
}

}  // namespace stochalign::io
