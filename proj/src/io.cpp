#include "coalstat/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

#include "coalstat/error.hpp"

namespace coalstat {

namespace {

std::string strip(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(strip(line.substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

long long parse_integer(const std::string& text, int line) {
  long long value = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("line " + std::to_string(line) + ": '" + text + "' is not an integer");
  }
  return value;
}

double parse_real(const std::string& text, int line) {
  try {
    return parse_number(text);
  } catch (const ParseError&) {
    throw ParseError("line " + std::to_string(line) + ": '" + text + "' is not a number");
  }
}

// Reads header plus data rows, skipping blank and '#' lines.
struct Table {
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
};

Table read_table(std::istream& in, const std::vector<std::string>& header) {
  Table table;
  std::string line;
  int number = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++number;
    const std::string text = strip(line);
    if (text.empty() || text[0] == '#') continue;
    std::vector<std::string> f = fields(text);
    if (!seen_header) {
      if (f != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw ParseError("line " + std::to_string(number) + ": expected header '" + expected +
                         "', got '" + text + "'");
      }
      seen_header = true;
      continue;
    }
    if (f.size() != header.size()) {
      throw ParseError("line " + std::to_string(number) + ": expected " +
                       std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    }
    table.rows.push_back(std::move(f));
    table.line_numbers.push_back(number);
  }
  if (!seen_header) throw ParseError("missing CSV header");
  return table;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  return in;
}

}  // namespace

std::string format_double(double x) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, x);
  return std::string(buffer, ptr);
}

ObservedSfs read_sfs_csv(std::istream& in, std::optional<int> n, bool folded) {
  const Table table = read_table(in, {"i", folded ? "folded_count" : "count"});
  std::vector<std::pair<long long, long long>> entries;
  std::set<long long> seen;
  long long max_i = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const int line = table.line_numbers[r];
    const long long i = parse_integer(table.rows[r][0], line);
    const long long c = parse_integer(table.rows[r][1], line);
    if (i < 1) throw ParseError("line " + std::to_string(line) + ": class index must be >= 1");
    if (c < 0) throw ParseError("line " + std::to_string(line) + ": negative count");
    if (!seen.insert(i).second) {
      throw ParseError("line " + std::to_string(line) + ": duplicate class i = " + std::to_string(i));
    }
    max_i = std::max(max_i, i);
    entries.emplace_back(i, c);
  }
  int size = 0;
  if (n) {
    size = *n;
  } else if (folded) {
    throw ParseError("folded SFS input needs an explicit sample size");
  } else if (entries.empty()) {
    throw ParseError("empty SFS file needs an explicit sample size");
  } else {
    size = static_cast<int>(max_i) + 1;
  }
  if (size < 2) throw ArgumentError("sample size must be >= 2, got " + std::to_string(size));
  const long long classes = folded ? size / 2 : size - 1;
  std::vector<std::int64_t> counts(classes, 0);
  for (const auto& [i, c] : entries) {
    if (i > classes) {
      throw ParseError("class i = " + std::to_string(i) + " exceeds " + std::to_string(classes) +
                       " for n = " + std::to_string(size));
    }
    counts[i - 1] = c;
  }
  if (folded) return ObservedSfs::folded_from(size, std::move(counts));
  return ObservedSfs{size, std::move(counts), false};
}

ObservedSfs read_sfs_csv(const std::string& path, std::optional<int> n, bool folded) {
  std::ifstream in = open(path);
  return read_sfs_csv(in, n, folded);
}

void write_sfs_csv(std::ostream& out, const SfsVector& sfs) {
  out << "i,count\n";
  for (int i = 1; i < sfs.sample_size(); ++i) out << i << ',' << sfs.count(i) << '\n';
}

void write_sfs_csv(std::ostream& out, const ObservedSfs& sfs) {
  out << (sfs.folded ? "i,folded_count\n" : "i,count\n");
  for (std::size_t i = 0; i < sfs.counts.size(); ++i) out << i + 1 << ',' << sfs.counts[i] << '\n';
}

std::map<long long, std::vector<SfsVector>> read_locus_sfs_csv(std::istream& in,
                                                               std::optional<int> n) {
  const Table table = read_table(in, {"rep", "locus", "i", "count"});
  struct Entry {
    long long rep, locus, i, count;
  };
  std::vector<Entry> entries;
  std::set<std::tuple<long long, long long, long long>> seen;
  long long max_i = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const int line = table.line_numbers[r];
    Entry e{parse_integer(table.rows[r][0], line), parse_integer(table.rows[r][1], line),
            parse_integer(table.rows[r][2], line), parse_integer(table.rows[r][3], line)};
    if (e.locus < 0) throw ParseError("line " + std::to_string(line) + ": negative locus index");
    if (e.i < 1) throw ParseError("line " + std::to_string(line) + ": class index must be >= 1");
    if (e.count < 0) throw ParseError("line " + std::to_string(line) + ": negative count");
    if (!seen.insert({e.rep, e.locus, e.i}).second) {
      throw ParseError("line " + std::to_string(line) + ": duplicate (rep, locus, i)");
    }
    max_i = std::max(max_i, e.i);
    entries.push_back(e);
  }
  const int size = n ? *n : static_cast<int>(max_i) + 1;
  if (size < 2) throw ParseError("cannot infer the sample size from an empty file");
  std::map<long long, std::vector<SfsVector>> out;
  for (const Entry& e : entries) {
    if (e.i > size - 1) throw ParseError("class i = " + std::to_string(e.i) + " exceeds n - 1");
    auto& loci = out[e.rep];
    while (static_cast<long long>(loci.size()) <= e.locus) loci.emplace_back(size);
    loci[e.locus].set(static_cast<int>(e.i), e.count);
  }
  return out;
}

std::map<long long, std::vector<SfsVector>> read_locus_sfs_csv(const std::string& path,
                                                               std::optional<int> n) {
  std::ifstream in = open(path);
  return read_locus_sfs_csv(in, n);
}

void write_locus_sfs_rows(std::ostream& out, long long rep, const std::vector<SfsVector>& loci) {
  for (std::size_t l = 0; l < loci.size(); ++l) {
    for (int i = 1; i < loci[l].sample_size(); ++i) {
      out << rep << ',' << l << ',' << i << ',' << loci[l].count(i) << '\n';
    }
  }
}

std::vector<Point2> read_summaries_csv(std::istream& in) {
  const Table table = read_table(in, {"zeta1", "zetabar"});
  std::vector<Point2> points;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const int line = table.line_numbers[r];
    points.push_back({parse_real(table.rows[r][0], line), parse_real(table.rows[r][1], line)});
  }
  return points;
}

std::vector<Point2> read_summaries_csv(const std::string& path) {
  std::ifstream in = open(path);
  return read_summaries_csv(in);
}

void write_summaries_csv(std::ostream& out, const std::vector<MultiLocusSummary>& summaries) {
  out << "zeta1,zetabar\n";
  for (const auto& s : summaries) out << format_double(s.zeta1) << ',' << format_double(s.zetabar) << '\n';
}

nlohmann::json to_json(const RecursionTables& tables) {
  const int n = tables.sample_size();
  nlohmann::json j;
  j["model"] = tables.model().to_string();
  j["n"] = n;
  if (tables.has_green()) {
    nlohmann::json green = nlohmann::json::array();
    for (int np = 2; np <= n; ++np) {
      nlohmann::json row = nlohmann::json::array();
      for (int m = 2; m <= np; ++m) row.push_back(tables.green()(np, m));
      green.push_back(row);
    }
    j["green"] = green;
    j["green_layout"] = "green[n'-2][m-2] = g(n', m), 2 <= m <= n'";
  }
  nlohmann::json p = nlohmann::json::array();
  for (int k = 2; k <= n; ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int b = 1; b <= n - k + 1; ++b) row.push_back(tables.probabilities()(k, b));
    p.push_back({{"k", k}, {"reachable", static_cast<bool>(tables.probabilities().reachable[k])},
                 {"p", row}});
  }
  j["p_table"] = p;
  std::vector<double> times(tables.level_times().mean.begin() + 2, tables.level_times().mean.end());
  j["level_times"] = times;
  j["branch_lengths"] = tables.branch_lengths();
  j["phi"] = tables.phi();
  j["expected_total_length"] = tables.expected_total_length();
  return j;
}

nlohmann::json to_json(const KdeModel& model) {
  nlohmann::json j;
  j["kernel"] = "gaussian";
  j["points"] = model.points().size();
  j["bandwidth"] = {{model.bandwidth()[0], model.bandwidth()[1]},
                    {model.bandwidth()[1], model.bandwidth()[2]}};
  j["fallback_bandwidth"] = model.fallback();
  return j;
}

nlohmann::json to_json(const MultiLocusSummary& summary) {
  return {{"zeta1", summary.zeta1},
          {"zetabar", summary.zetabar},
          {"k", summary.k},
          {"loci_used", summary.loci_used}};
}

}  // namespace coalstat
