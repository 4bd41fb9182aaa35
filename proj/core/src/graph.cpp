#include "wsfe/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "binary_io.hpp"
#include "wsfe/error.hpp"

namespace wsfe::graph {

namespace {

constexpr std::string_view kGraphMagic = "WSFG";
constexpr std::uint32_t kGraphVersion = 1;

void build_csr(std::size_t num_rows, const std::vector<std::pair<Index, Index>>& edges,
               bool by_first, std::vector<std::size_t>& offsets, std::vector<Index>& adj) {
  offsets.assign(num_rows + 1, 0);
  for (const auto& [u, i] : edges) ++offsets[(by_first ? u : i) + 1];
  for (std::size_t r = 0; r < num_rows; ++r) offsets[r + 1] += offsets[r];
  adj.resize(edges.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  // Edges are sorted by (user, item) so both directions come out sorted.
  for (const auto& [u, i] : edges) {
    if (by_first) {
      adj[cursor[u]++] = i;
    } else {
      adj[cursor[i]++] = u;
    }
  }
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

bool is_number(std::string_view s) {
  if (s.empty()) return false;
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc{} && p == end;
}

class IdMapper {
 public:
  IdMapper(IdMode mode, const char* kind) : mode_(mode), kind_(kind) {}

  Index map(std::string_view raw, std::size_t line_no) {
    if (mode_ == IdMode::numeric) {
      std::uint64_t v = 0;
      const auto* end = raw.data() + raw.size();
      const auto [p, ec] = std::from_chars(raw.data(), end, v);
      if (ec == std::errc::result_out_of_range ||
          (ec == std::errc{} && p == end && v > std::numeric_limits<Index>::max())) {
        throw ParseError("line " + std::to_string(line_no) + ": " + kind_ +
                         " id overflows the 32-bit index space");
      }
      if (ec != std::errc{} || p != end || v == 0) {
        throw ParseError("line " + std::to_string(line_no) + ": " + kind_ +
                         " id is not a positive integer");
      }
      const auto idx = static_cast<Index>(v - 1);
      count_ = std::max<std::uint64_t>(count_, v);
      return idx;
    }
    auto it = lookup_.find(std::string(raw));
    if (it != lookup_.end()) return it->second;
    if (ids_.size() >= std::numeric_limits<Index>::max()) {
      throw ParseError("line " + std::to_string(line_no) + ": too many distinct " + kind_ +
                       " ids for the 32-bit index space");
    }
    const auto idx = static_cast<Index>(ids_.size());
    ids_.emplace_back(raw);
    lookup_.emplace(ids_.back(), idx);
    count_ = ids_.size();
    return idx;
  }

  Index count() const { return static_cast<Index>(count_); }

  std::vector<std::string> take_ids() {
    if (mode_ == IdMode::numeric) {
      std::vector<std::string> ids(count_);
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = std::to_string(i + 1);
      return ids;
    }
    return std::move(ids_);
  }

 private:
  IdMode mode_;
  std::string kind_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, Index> lookup_;
  std::uint64_t count_ = 0;
};

}  // namespace

InteractionGraph::InteractionGraph(Index num_users, Index num_items,
                                   std::vector<std::pair<Index, Index>> edges)
    : num_users_(num_users), num_items_(num_items), edges_(std::move(edges)) {
  for (const auto& [u, i] : edges_) {
    if (u >= num_users_ || i >= num_items_) {
      throw ParseError("edge (" + std::to_string(u) + ", " + std::to_string(i) +
                       ") outside index space " + std::to_string(num_users_) + " x " +
                       std::to_string(num_items_));
    }
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  build_csr(num_users_, edges_, true, user_offsets_, user_adj_);
  build_csr(num_items_, edges_, false, item_offsets_, item_adj_);
}

std::span<const Index> InteractionGraph::user_items(Index user) const {
  return std::span<const Index>(user_adj_).subspan(user_offsets_[user],
                                                   user_offsets_[user + 1] - user_offsets_[user]);
}

std::span<const Index> InteractionGraph::item_users(Index item) const {
  return std::span<const Index>(item_adj_).subspan(item_offsets_[item],
                                                   item_offsets_[item + 1] - item_offsets_[item]);
}

LoadedGraph parse_interactions(std::istream& in, InputFormat format, IdMode ids) {
  IdMapper users(ids, "user");
  IdMapper items(ids, "item");
  std::vector<std::pair<Index, Index>> edges;
  std::string line;
  std::size_t line_no = 0;
  std::size_t data_lines = 0;
  const std::size_t expected_fields = format == InputFormat::tsv_pairs ? 2 : 4;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != expected_fields) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(expected_fields) + " tab-separated fields, found " +
                       std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": empty identifier");
    }
    if (format == InputFormat::tsv_rated && !(is_number(fields[2]) && is_number(fields[3]))) {
      throw ParseError("line " + std::to_string(line_no) + ": rating and timestamp must be numeric");
    }
    ++data_lines;
    const Index u = users.map(fields[0], line_no);
    const Index i = items.map(fields[1], line_no);
    edges.emplace_back(u, i);
  }
  if (data_lines == 0) throw ParseError("empty input");

  LoadedGraph out;
  out.graph = InteractionGraph(users.count(), items.count(), std::move(edges));
  out.user_ids = users.take_ids();
  out.item_ids = items.take_ids();
  return out;
}

LoadedGraph load_interactions(const std::filesystem::path& path, InputFormat format, IdMode ids) {
  std::ifstream in(path);
  if (!in) throw Error("input not found: " + path.string());
  return parse_interactions(in, format, ids);
}

std::string GraphStats::avg_interactions_str() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", avg_interactions);
  return buf;
}

GraphStats stats(const InteractionGraph& graph) {
  GraphStats s;
  s.num_users = graph.num_users();
  s.num_items = graph.num_items();
  s.num_edges = graph.num_edges();
  s.avg_interactions =
      s.num_users == 0 ? 0.0 : static_cast<double>(s.num_edges) / static_cast<double>(s.num_users);
  return s;
}

void write_graph(const InteractionGraph& graph, std::ostream& out) {
  if (graph.num_edges() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("graph has too many edges for the WSFG format");
  }
  detail::put_magic(out, kGraphMagic);
  detail::put_u32(out, kGraphVersion);
  detail::put_u32(out, graph.num_users());
  detail::put_u32(out, graph.num_items());
  detail::put_u32(out, static_cast<std::uint32_t>(graph.num_edges()));
  for (const auto& [u, i] : graph.edges()) {
    detail::put_u32(out, u);
    detail::put_u32(out, i);
  }
}

InteractionGraph read_graph(std::istream& in) {
  if (!detail::check_magic(in, kGraphMagic)) throw ParseError("not a WSFE graph file");
  const auto version = detail::get_u32(in, "graph header");
  if (version != kGraphVersion) {
    throw ParseError("unsupported graph file version " + std::to_string(version));
  }
  const auto users = detail::get_u32(in, "graph header");
  const auto items = detail::get_u32(in, "graph header");
  const auto n = detail::get_u32(in, "graph header");
  std::vector<std::pair<Index, Index>> edges(n);
  for (auto& e : edges) {
    e.first = detail::get_u32(in, "edge list");
    e.second = detail::get_u32(in, "edge list");
  }
  detail::expect_eof(in, "graph file");
  return InteractionGraph(users, items, std::move(edges));
}

void save_graph(const InteractionGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_graph(graph, out);
  if (!out) throw Error("write failed: " + path.string());
}

InteractionGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("input not found: " + path.string());
  return read_graph(in);
}

GroundTruthRanking build_ground_truth(const InteractionGraph& graph, Index query,
                                      std::size_t depth) {
  if (query >= graph.num_users()) {
    throw Error("query user " + std::to_string(query) + " out of range");
  }
  GroundTruthRanking out;
  out.query = query;
  if (depth == 0) return out;

  std::unordered_map<Index, std::size_t> counts;
  for (const Index item : graph.user_items(query)) {
    for (const Index v : graph.item_users(item)) {
      if (v != query) ++counts[v];
    }
  }
  out.ranked.reserve(counts.size());
  for (const auto& [v, c] : counts) out.ranked.push_back({v, c});
  const auto better = [](const Neighbor& a, const Neighbor& b) {
    return a.overlap != b.overlap ? a.overlap > b.overlap : a.user < b.user;
  };
  const auto keep = std::min(depth, out.ranked.size());
  std::partial_sort(out.ranked.begin(), out.ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                    out.ranked.end(), better);
  out.ranked.resize(keep);
  return out;
}

void write_ground_truth_tsv(std::span<const GroundTruthRanking> rankings, std::ostream& out) {
  for (const auto& r : rankings) {
    for (const auto& n : r.ranked) out << r.query << '\t' << n.user << '\t' << n.overlap << '\n';
  }
}

}  // namespace wsfe::graph
