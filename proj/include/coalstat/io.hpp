#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coalstat/inference.hpp"
#include "coalstat/multilocus.hpp"
#include "coalstat/recursions.hpp"
#include "coalstat/sfs.hpp"
#include "json.hpp"

namespace coalstat {

// CSV `i,count` (or `i,folded_count` when folded). Missing rows read as 0.
// n comes from `n` if given, else max i + 1 (unfolded only).
ObservedSfs read_sfs_csv(std::istream& in, std::optional<int> n = std::nullopt, bool folded = false);
ObservedSfs read_sfs_csv(const std::string& path, std::optional<int> n = std::nullopt,
                         bool folded = false);
void write_sfs_csv(std::ostream& out, const SfsVector& sfs);
void write_sfs_csv(std::ostream& out, const ObservedSfs& sfs);

// Per-locus rows `rep,locus,i,count`, grouped by replicate.
std::map<long long, std::vector<SfsVector>> read_locus_sfs_csv(std::istream& in,
                                                               std::optional<int> n = std::nullopt);
std::map<long long, std::vector<SfsVector>> read_locus_sfs_csv(const std::string& path,
                                                               std::optional<int> n = std::nullopt);
void write_locus_sfs_rows(std::ostream& out, long long rep, const std::vector<SfsVector>& loci);

// `zeta1,zetabar` rows.
std::vector<Point2> read_summaries_csv(std::istream& in);
std::vector<Point2> read_summaries_csv(const std::string& path);
void write_summaries_csv(std::ostream& out, const std::vector<MultiLocusSummary>& summaries);

nlohmann::json to_json(const RecursionTables& tables);
nlohmann::json to_json(const KdeModel& model);
nlohmann::json to_json(const MultiLocusSummary& summary);

// Shortest text that parses back to the same double.
std::string format_double(double x);

}  // namespace coalstat
