#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <fspr/graph.hpp>
#include <fspr/groups.hpp>

namespace fspr {

// ---------------------------------------------------------------------------
// Graph input. Edge lists hold one "source<TAB>target" pair per line (any
// whitespace works); label files one "node_id<TAB>{0|1}" per line with
// 1 = protected. Lines starting with '#' and blank lines are skipped.
// ---------------------------------------------------------------------------

using RawEdge = std::pair<std::int64_t, std::int64_t>;

std::vector<RawEdge> read_edge_list(std::istream &in);
std::vector<std::pair<std::int64_t, Group>> read_labels(std::istream &in);

/// A graph whose arbitrary input ids were remapped to 0..N-1 in ascending
/// order; original_ids[u] is the id node u had in the input files.
struct LabeledGraph {
    DirectedGraph graph;
    GroupAssignment groups;
    std::vector<std::int64_t> original_ids;
};

/// Node set is the union of edge endpoints and labeled ids. Every node needs
/// exactly one label; ParseError otherwise.
LabeledGraph assemble_labeled_graph(const std::vector<RawEdge> &edges,
                                    const std::vector<std::pair<std::int64_t, Group>> &labels,
                                    bool dedup);

LabeledGraph load_labeled_graph(const std::filesystem::path &edges_path,
                                const std::filesystem::path &labels_path, bool dedup);

void write_edge_list(std::ostream &out, const DirectedGraph &g);
void write_labels(std::ostream &out, const GroupAssignment &groups);

// ---------------------------------------------------------------------------
// Output. Doubles are printed with 17 significant digits; NaN becomes "nan"
// in CSV and null in JSON.
// ---------------------------------------------------------------------------

enum class OutputFormat { Csv, Json };

OutputFormat parse_output_format(const std::string &name);
const char *extension(OutputFormat format);

std::string format_double(double x);

using Cell = std::variant<std::int64_t, double, std::string>;

/// Column-oriented table: CSV with a header row, or a JSON array of objects.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

/// Flat key-value record: CSV "key,value" lines, or one JSON object.
struct Record {
    std::vector<std::pair<std::string, Cell>> fields;

    void add(std::string key, Cell value) { fields.emplace_back(std::move(key), std::move(value)); }
};

void write_table(std::ostream &out, const Table &table, OutputFormat format);
void write_record(std::ostream &out, const Record &record, OutputFormat format);

/// Per-node score records as emitted by `rank`.
struct ScoreTable {
    std::vector<std::int64_t> node_ids;
    std::vector<std::size_t> k_in;
    std::vector<std::size_t> k_out;
    std::vector<Group> groups;
    std::vector<double> scores;

    std::size_t size() const { return node_ids.size(); }
};

ScoreTable make_score_table(const LabeledGraph &input, std::vector<double> scores);
Table to_table(const ScoreTable &scores);

/// Reads a score file written by write_table(to_table(...)); the format
/// follows the extension (.json, anything else is CSV).
ScoreTable read_score_file(const std::filesystem::path &path);

}  // namespace fspr
