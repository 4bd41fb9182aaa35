#include "wsfe/config.hpp"

#include <set>
#include <sstream>

#include "wsfe/error.hpp"

namespace wsfe {

std::string to_string(graph::InputFormat f) {
  return f == graph::InputFormat::tsv_pairs ? "tsv_pairs" : "tsv_rated";
}

std::string to_string(graph::IdMode m) { return m == graph::IdMode::dense ? "dense" : "numeric"; }

graph::InputFormat parse_input_format(std::string_view s) {
  if (s == "tsv_pairs") return graph::InputFormat::tsv_pairs;
  if (s == "tsv_rated") return graph::InputFormat::tsv_rated;
  throw Error("unknown input format '" + std::string(s) + "' (expected tsv_pairs or tsv_rated)");
}

graph::IdMode parse_id_mode(std::string_view s) {
  if (s == "dense") return graph::IdMode::dense;
  if (s == "numeric") return graph::IdMode::numeric;
  throw Error("unknown id mode '" + std::string(s) + "' (expected dense or numeric)");
}

std::vector<std::size_t> parse_k_list(std::string_view s) {
  std::vector<std::size_t> ks;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto tok = s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start);
    const auto k = parse_uint(tok, "k_list");
    if (k == 0) throw Error("k_list entries must be >= 1");
    ks.push_back(k);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (ks.empty()) throw Error("k_list must not be empty");
  return ks;
}

std::string format_k_list(const std::vector<std::size_t>& ks) {
  std::string out;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ks[i]);
  }
  return out;
}

Metadata PipelineConfig::to_metadata() const {
  Metadata m;
  m.set("data_path", data_path);
  m.set("graph_path", graph_path);
  m.set("features_path", features_path);
  m.set("encodings_path", encodings_path);
  m.set("report_path", report_path);
  m.set("format", to_string(format));
  m.set("id_mode", to_string(id_mode));
  m.set("dim", std::uint64_t{dim});
  m.set("depth", std::uint64_t{depth});
  m.set("epochs", std::uint64_t{epochs});
  m.set_real("lr", lr);
  m.set_real("reg", reg);
  m.set("batch_size", std::uint64_t{batch_size});
  m.set("train_seed", train_seed);
  m.set("include_items", include_items ? "true" : "false");
  m.set("slices", std::uint64_t{slices});
  m.set("layout", std::string(encoder::to_string(layout)));
  m.set("normalization", std::string(encoder::to_string(normalization)));
  m.set("projection_seed", projection_seed);
  m.set("reference_seed", reference_seed);
  m.set("reference_scale", reference_scale ? format_real(*reference_scale) : "auto");
  m.set("k_list", format_k_list(k_list));
  m.set("num_queries", std::uint64_t{num_queries});
  m.set("eval_seed", eval_seed);
  m.set("threads", std::uint64_t{threads});
  return m;
}

PipelineConfig PipelineConfig::from_metadata(const Metadata& m) {
  static const std::set<std::string, std::less<>> known = {
      "data_path", "graph_path", "features_path", "encodings_path", "report_path", "format",
      "id_mode", "dim", "depth", "epochs", "lr", "reg", "batch_size", "train_seed",
      "include_items", "slices", "layout", "normalization", "projection_seed", "reference_seed",
      "reference_scale", "k_list", "num_queries", "eval_seed", "threads"};
  for (const auto& [k, v] : m.entries()) {
    if (!known.contains(k)) throw ParseError("unknown config key '" + k + "'");
  }
  PipelineConfig c;
  const auto str = [&](std::string_view key, std::string& dst) {
    if (auto v = m.get(key)) dst = *v;
  };
  const auto size = [&](std::string_view key, std::size_t& dst) {
    if (m.contains(key)) dst = static_cast<std::size_t>(m.require_uint(key));
  };
  const auto u64 = [&](std::string_view key, std::uint64_t& dst) {
    if (m.contains(key)) dst = m.require_uint(key);
  };
  const auto real = [&](std::string_view key, double& dst) {
    if (m.contains(key)) dst = m.require_real(key);
  };
  str("data_path", c.data_path);
  str("graph_path", c.graph_path);
  str("features_path", c.features_path);
  str("encodings_path", c.encodings_path);
  str("report_path", c.report_path);
  if (auto v = m.get("format")) c.format = parse_input_format(*v);
  if (auto v = m.get("id_mode")) c.id_mode = parse_id_mode(*v);
  size("dim", c.dim);
  size("depth", c.depth);
  size("epochs", c.epochs);
  real("lr", c.lr);
  real("reg", c.reg);
  size("batch_size", c.batch_size);
  u64("train_seed", c.train_seed);
  if (auto v = m.get("include_items")) {
    if (*v != "true" && *v != "false") throw ParseError("include_items must be true or false");
    c.include_items = *v == "true";
  }
  size("slices", c.slices);
  if (auto v = m.get("layout")) c.layout = encoder::parse_layout(*v);
  if (auto v = m.get("normalization")) c.normalization = encoder::parse_scaling(*v);
  u64("projection_seed", c.projection_seed);
  u64("reference_seed", c.reference_seed);
  if (auto v = m.get("reference_scale")) {
    if (*v == "auto") {
      c.reference_scale.reset();
    } else {
      c.reference_scale = parse_real(*v, "reference_scale");
    }
  }
  if (auto v = m.get("k_list")) c.k_list = parse_k_list(*v);
  size("num_queries", c.num_queries);
  u64("eval_seed", c.eval_seed);
  if (m.contains("threads")) c.threads = static_cast<unsigned>(m.require_uint("threads"));
  return c;
}

void PipelineConfig::save(const std::filesystem::path& path) const { to_metadata().save(path); }

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  return from_metadata(Metadata::load(path));
}

backbone::TrainOptions PipelineConfig::train_options() const {
  backbone::TrainOptions o;
  o.dim = dim;
  o.depth = depth;
  o.epochs = epochs;
  o.lr = lr;
  o.reg = reg;
  o.seed = train_seed;
  o.batch_size = batch_size;
  o.threads = threads;
  return o;
}

eval::EvalOptions PipelineConfig::eval_options() const {
  eval::EvalOptions o;
  o.k_list = k_list;
  o.num_queries = num_queries;
  o.seed = eval_seed;
  o.threads = threads;
  return o;
}

}  // namespace wsfe
