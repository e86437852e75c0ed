#include <fspr/io.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include <fspr/errors.hpp>

namespace fspr {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Splits on runs of blanks or tabs.
std::vector<std::string_view> tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
            ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t')
            ++i;
        if (i > start)
            out.push_back(s.substr(start, i - start));
    }
    return out;
}

template <typename T>
T parse_int(std::string_view s, std::size_t line) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line) + ": expected an integer, got '" +
                         std::string(s) + "'");
    return v;
}

double parse_real(std::string_view s, std::size_t line) {
    if (s == "nan")
        return std::nan("");
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line) + ": expected a number, got '" +
                         std::string(s) + "'");
    return v;
}

// Calls fn(tokens, line_number) for every non-comment, non-blank line.
template <typename Fn>
void for_each_data_line(std::istream &in, Fn fn) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        fn(tokens(body), number);
    }
}

std::string csv_escape(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell &cell, OutputFormat format) {
    if (const auto *i = std::get_if<std::int64_t>(&cell))
        return std::to_string(*i);
    if (const auto *d = std::get_if<double>(&cell)) {
        if (format == OutputFormat::Json && !std::isfinite(*d))
            return "null";
        return format_double(*d);
    }
    const auto &s = std::get<std::string>(cell);
    return format == OutputFormat::Json ? nlohmann::json(s).dump() : csv_escape(s);
}

std::ifstream open_input(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open " + path.string());
    return in;
}

std::vector<std::string_view> split_csv(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(',', start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

Group parse_group(std::int64_t v, std::size_t line) {
    if (v == 0)
        return Group::Unprotected;
    if (v == 1)
        return Group::Protected;
    throw ParseError("line " + std::to_string(line) + ": group label must be 0 or 1");
}

}  // namespace

std::vector<RawEdge> read_edge_list(std::istream &in) {
    std::vector<RawEdge> edges;
    for_each_data_line(in, [&](const auto &tok, std::size_t line) {
        if (tok.size() < 2)
            throw ParseError("line " + std::to_string(line) + ": expected 'source<TAB>target'");
        const auto s = parse_int<std::int64_t>(tok[0], line);
        const auto t = parse_int<std::int64_t>(tok[1], line);
        if (s < 0 || t < 0)
            throw ParseError("line " + std::to_string(line) + ": node ids must be nonnegative");
        edges.emplace_back(s, t);
    });
    return edges;
}

std::vector<std::pair<std::int64_t, Group>> read_labels(std::istream &in) {
    std::vector<std::pair<std::int64_t, Group>> labels;
    for_each_data_line(in, [&](const auto &tok, std::size_t line) {
        if (tok.size() < 2)
            throw ParseError("line " + std::to_string(line) + ": expected 'node_id<TAB>label'");
        const auto id = parse_int<std::int64_t>(tok[0], line);
        labels.emplace_back(id, parse_group(parse_int<std::int64_t>(tok[1], line), line));
    });
    return labels;
}

LabeledGraph assemble_labeled_graph(const std::vector<RawEdge> &edges,
                                    const std::vector<std::pair<std::int64_t, Group>> &labels,
                                    bool dedup) {
    std::vector<std::int64_t> ids;
    ids.reserve(edges.size() * 2 + labels.size());
    for (const auto &[s, t] : edges) {
        ids.push_back(s);
        ids.push_back(t);
    }
    for (const auto &[id, g] : labels)
        ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.empty())
        throw EmptyGraph();
    const auto index_of = [&](std::int64_t id) {
        return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };

    std::vector<Edge> mapped;
    mapped.reserve(edges.size());
    for (const auto &[s, t] : edges)
        mapped.push_back({index_of(s), index_of(t)});
    BuildOptions opts;
    opts.node_count = ids.size();
    opts.dedup = dedup;
    auto graph = build_graph(mapped, opts);

    std::vector<int> seen(ids.size(), -1);
    for (const auto &[id, g] : labels) {
        auto &slot = seen[index_of(id)];
        if (slot != -1 && slot != static_cast<int>(g))
            throw ParseError("conflicting labels for node " + std::to_string(id));
        slot = static_cast<int>(g);
    }
    std::vector<Group> group_of(ids.size());
    for (std::size_t u = 0; u < ids.size(); ++u) {
        if (seen[u] == -1)
            throw ParseError("node " + std::to_string(ids[u]) + " has no group label");
        group_of[u] = static_cast<Group>(seen[u]);
    }
    GroupAssignment groups(graph, std::move(group_of));
    return {std::move(graph), std::move(groups), std::move(ids)};
}

LabeledGraph load_labeled_graph(const std::filesystem::path &edges_path,
                                const std::filesystem::path &labels_path, bool dedup) {
    auto edge_in = open_input(edges_path);
    auto label_in = open_input(labels_path);
    const auto edges = read_edge_list(edge_in);
    const auto labels = read_labels(label_in);
    return assemble_labeled_graph(edges, labels, dedup);
}

void write_edge_list(std::ostream &out, const DirectedGraph &g) {
    for (std::size_t u = 0; u < g.node_count(); ++u)
        for (NodeId t : g.out_neighbors(static_cast<NodeId>(u)))
            out << u << '\t' << t << '\n';
}

void write_labels(std::ostream &out, const GroupAssignment &groups) {
    for (std::size_t u = 0; u < groups.size(); ++u)
        out << u << '\t' << (groups.is_protected(static_cast<NodeId>(u)) ? 1 : 0) << '\n';
}

OutputFormat parse_output_format(const std::string &name) {
    if (name == "csv")
        return OutputFormat::Csv;
    if (name == "json")
        return OutputFormat::Json;
    throw ParseError("unknown output format '" + name + "'");
}

const char *extension(OutputFormat format) {
    return format == OutputFormat::Json ? ".json" : ".csv";
}

std::string format_double(double x) {
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_table(std::ostream &out, const Table &table, OutputFormat format) {
    if (format == OutputFormat::Csv) {
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            out << (c ? "," : "") << csv_escape(table.columns[c]);
        out << '\n';
        for (const auto &row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? "," : "") << cell_text(row[c], format);
            out << '\n';
        }
        return;
    }
    out << "[\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << "  {";
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            out << (c ? ", " : "") << nlohmann::json(table.columns[c]).dump() << ": "
                << cell_text(table.rows[r][c], format);
        out << (r + 1 < table.rows.size() ? "},\n" : "}\n");
    }
    out << "]\n";
}

void write_record(std::ostream &out, const Record &record, OutputFormat format) {
    if (format == OutputFormat::Csv) {
        out << "key,value\n";
        for (const auto &[key, value] : record.fields)
            out << csv_escape(key) << ',' << cell_text(value, format) << '\n';
        return;
    }
    out << "{\n";
    for (std::size_t i = 0; i < record.fields.size(); ++i) {
        const auto &[key, value] = record.fields[i];
        out << "  " << nlohmann::json(key).dump() << ": " << cell_text(value, format)
            << (i + 1 < record.fields.size() ? ",\n" : "\n");
    }
    out << "}\n";
}

ScoreTable make_score_table(const LabeledGraph &input, std::vector<double> scores) {
    const auto &g = input.graph;
    if (scores.size() != g.node_count())
        throw DimensionMismatch(g.node_count(), scores.size());
    ScoreTable t;
    t.node_ids = input.original_ids;
    t.k_in = g.in_degrees();
    t.k_out = g.out_degrees();
    t.groups.assign(input.groups.labels().begin(), input.groups.labels().end());
    t.scores = std::move(scores);
    return t;
}

Table to_table(const ScoreTable &scores) {
    Table table;
    table.columns = {"node_id", "k_in", "k_out", "group", "score"};
    table.rows.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        table.rows.push_back({scores.node_ids[i], static_cast<std::int64_t>(scores.k_in[i]),
                              static_cast<std::int64_t>(scores.k_out[i]),
                              static_cast<std::int64_t>(scores.groups[i]), scores.scores[i]});
    return table;
}

ScoreTable read_score_file(const std::filesystem::path &path) {
    auto in = open_input(path);
    ScoreTable t;
    auto push = [&](std::int64_t id, std::int64_t k_in, std::int64_t k_out, std::int64_t group,
                    double score, std::size_t line) {
        if (k_in < 0 || k_out < 0)
            throw ParseError("line " + std::to_string(line) + ": negative degree");
        t.node_ids.push_back(id);
        t.k_in.push_back(static_cast<std::size_t>(k_in));
        t.k_out.push_back(static_cast<std::size_t>(k_out));
        t.groups.push_back(parse_group(group, line));
        t.scores.push_back(score);
    };

    if (path.extension() == ".json") {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception &e) {
            throw ParseError(path.string() + ": " + e.what());
        }
        if (!doc.is_array())
            throw ParseError(path.string() + ": expected an array of score records");
        std::size_t line = 0;
        for (const auto &rec : doc) {
            ++line;
            try {
                const auto &s = rec.at("score");
                push(rec.at("node_id").get<std::int64_t>(), rec.at("k_in").get<std::int64_t>(),
                     rec.at("k_out").get<std::int64_t>(), rec.at("group").get<std::int64_t>(),
                     s.is_null() ? std::nan("") : s.get<double>(), line);
            } catch (const nlohmann::json::exception &e) {
                throw ParseError(path.string() + ": record " + std::to_string(line) + ": " +
                                 e.what());
            }
        }
        return t;
    }

    std::string line;
    std::size_t number = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++number;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        const auto cols = split_csv(body);
        if (header) {
            if (cols.size() != 5 || cols[0] != "node_id" || cols[4] != "score")
                throw ParseError(path.string() +
                                 ": expected header node_id,k_in,k_out,group,score");
            header = false;
            continue;
        }
        if (cols.size() != 5)
            throw ParseError(path.string() + ": line " + std::to_string(number) +
                             ": expected 5 columns");
        push(parse_int<std::int64_t>(cols[0], number), parse_int<std::int64_t>(cols[1], number),
             parse_int<std::int64_t>(cols[2], number), parse_int<std::int64_t>(cols[3], number),
             parse_real(cols[4], number), number);
    }
    return t;
}

}  // namespace fspr
