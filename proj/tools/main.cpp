// wsfe: ingest -> train -> encode -> eval pipeline driver.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wsfe/backbone.hpp"
#include "wsfe/config.hpp"
#include "wsfe/encoder.hpp"
#include "wsfe/error.hpp"
#include "wsfe/eval.hpp"
#include "wsfe/graph.hpp"
#include "wsfe/metadata.hpp"
#include "wsfe/ot.hpp"
#include "wsfe/pipeline.hpp"

namespace fs = std::filesystem;
using namespace wsfe;

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

struct UsageError : Error {
  using Error::Error;
};

// Command-line values; anything left unset falls back to the config file.
struct Flags {
  std::string config_file;
  std::optional<unsigned> threads;

  std::optional<std::string> input, graph, features, encodings, out;
  std::optional<std::string> format, id_mode;

  std::optional<std::size_t> dim, depth, epochs, batch_size;
  std::optional<double> lr, reg;
  std::optional<std::uint64_t> train_seed;
  bool include_items = false;

  std::optional<std::size_t> slices;
  std::optional<std::string> layout, normalization, reference_scale;
  std::optional<std::uint64_t> projection_seed, reference_seed;

  std::optional<std::string> k_list;
  std::optional<std::size_t> num_queries;
  std::optional<std::uint64_t> eval_seed;
};

template <class T>
void apply(T& dst, const std::optional<T>& v) {
  if (v) dst = *v;
}

PipelineConfig resolve(const Flags& f) {
  PipelineConfig c;
  if (!f.config_file.empty()) {
    if (!fs::exists(f.config_file)) throw UsageError("config not found: " + f.config_file);
    c = PipelineConfig::load(f.config_file);
  }
  apply(c.threads, f.threads);
  apply(c.dim, f.dim);
  apply(c.depth, f.depth);
  apply(c.epochs, f.epochs);
  apply(c.batch_size, f.batch_size);
  apply(c.lr, f.lr);
  apply(c.reg, f.reg);
  apply(c.train_seed, f.train_seed);
  if (f.include_items) c.include_items = true;
  apply(c.slices, f.slices);
  apply(c.projection_seed, f.projection_seed);
  apply(c.reference_seed, f.reference_seed);
  apply(c.num_queries, f.num_queries);
  apply(c.eval_seed, f.eval_seed);
  if (f.format) c.format = parse_input_format(*f.format);
  if (f.id_mode) c.id_mode = parse_id_mode(*f.id_mode);
  if (f.layout) c.layout = encoder::parse_layout(*f.layout);
  if (f.normalization) c.normalization = encoder::parse_scaling(*f.normalization);
  if (f.reference_scale) {
    if (*f.reference_scale == "auto") {
      c.reference_scale.reset();
    } else {
      c.reference_scale = parse_real(*f.reference_scale, "reference-scale");
    }
  }
  if (f.k_list) c.k_list = parse_k_list(*f.k_list);
  return c;
}

std::string require_path(const std::string& value, std::string_view flag) {
  if (value.empty()) throw UsageError("missing " + std::string(flag) + " (flag or config file)");
  return value;
}

std::string require_input(const std::string& value, std::string_view flag) {
  require_path(value, flag);
  if (!fs::exists(value)) throw UsageError("input not found: " + value);
  return value;
}

std::optional<Metadata> load_sidecar(const fs::path& artifact) {
  const auto p = sidecar_path(artifact);
  if (!fs::exists(p)) return std::nullopt;
  return Metadata::load(p);
}

void expect_equal(const Metadata& meta, std::string_view key, std::uint64_t actual,
                  const std::string& what) {
  if (!meta.contains(key)) return;
  const auto recorded = meta.require_uint(key);
  if (recorded != actual) {
    throw MetadataError(what + ": metadata records " + std::string(key) + "=" +
                        std::to_string(recorded) + " but the file has " + std::to_string(actual));
  }
}

void expect_artifact(const Metadata& meta, std::string_view kind, const std::string& path) {
  if (const auto a = meta.get("artifact"); a && *a != kind) {
    throw MetadataError(path + ": expected a " + std::string(kind) + " artifact, sidecar says " + *a);
  }
}

void print_stats(const graph::GraphStats& s) {
  std::cout << "users=" << s.num_users << " items=" << s.num_items << " edges=" << s.num_edges << '\n'
            << "avg_interactions=" << s.avg_interactions_str() << '\n';
}

int cmd_ingest(const Flags& f) {
  auto c = resolve(f);
  apply(c.data_path, f.input);
  apply(c.graph_path, f.out);
  require_input(c.data_path, "--input");
  const auto loaded = graph::load_interactions(c.data_path, c.format, c.id_mode);
  const auto s = graph::stats(loaded.graph);
  print_stats(s);
  if (!c.graph_path.empty()) {
    graph::save_graph(loaded.graph, c.graph_path);
    Metadata meta;
    meta.set("artifact", "graph");
    meta.set("users", std::uint64_t{s.num_users});
    meta.set("items", std::uint64_t{s.num_items});
    meta.set("edges", std::uint64_t{s.num_edges});
    meta.merge(c.to_metadata(), "config.");
    meta.save(sidecar_path(c.graph_path));
  }
  return 0;
}

int cmd_train(const Flags& f) {
  auto c = resolve(f);
  apply(c.graph_path, f.graph);
  apply(c.features_path, f.out);
  require_input(c.graph_path, "--graph");
  require_path(c.features_path, "--out");
  const auto g = graph::load_graph(c.graph_path);
  const auto trained = pipeline::train_layer_features(g, c);
  backbone::export_layer_features(trained.features, c.features_path);

  Metadata meta;
  meta.set("artifact", "features");
  meta.set("rows", std::uint64_t{trained.features.entities()});
  meta.set("L", std::uint64_t{trained.features.depth()});
  meta.set("d", std::uint64_t{trained.features.dim()});
  meta.set("graph_users", std::uint64_t{g.num_users()});
  meta.set("graph_items", std::uint64_t{g.num_items()});
  if (!trained.loss_trace.empty()) meta.set_real("final_loss", trained.loss_trace.back());
  meta.merge(c.to_metadata(), "config.");
  meta.save(sidecar_path(c.features_path));

  std::cout << "entities=" << trained.features.entities() << " L=" << trained.features.depth()
            << " d=" << trained.features.dim() << '\n';
  if (!trained.loss_trace.empty()) {
    std::printf("epochs=%zu final_loss=%.6f\n", trained.loss_trace.size(), trained.loss_trace.back());
  }
  return 0;
}

int cmd_encode(const Flags& f) {
  auto c = resolve(f);
  apply(c.features_path, f.features);
  apply(c.encodings_path, f.out);
  require_input(c.features_path, "--features");
  require_path(c.encodings_path, "--out");
  const auto features = backbone::import_layer_features(c.features_path);
  if (const auto meta = load_sidecar(c.features_path)) {
    expect_artifact(*meta, "features", c.features_path);
    expect_equal(*meta, "rows", features.entities(), c.features_path);
    expect_equal(*meta, "L", features.depth(), c.features_path);
    expect_equal(*meta, "d", features.dim(), c.features_path);
  } else {
    std::cerr << "warning: " << sidecar_path(c.features_path).string()
              << " not found; using the feature file header as is\n";
  }

  const auto encoded = pipeline::encode_features(features, c);
  encoder::save_encodings(encoded.encodings, c.encodings_path);
  pipeline::encoding_metadata(encoded, features, c).save(sidecar_path(c.encodings_path));
  std::cout << "rows=" << encoded.encodings.rows() << " dim=" << encoded.encodings.dim()
            << " layout=" << encoder::to_string(encoded.encodings.layout) << '\n';
  return 0;
}

int cmd_eval(const Flags& f) {
  auto c = resolve(f);
  apply(c.graph_path, f.graph);
  apply(c.encodings_path, f.encodings);
  apply(c.report_path, f.out);
  require_input(c.graph_path, "--graph");
  require_input(c.encodings_path, "--encodings");
  const auto g = graph::load_graph(c.graph_path);
  const auto enc = encoder::load_encodings(c.encodings_path);
  const auto enc_meta = load_sidecar(c.encodings_path);
  if (enc_meta) {
    expect_artifact(*enc_meta, "encodings", c.encodings_path);
    expect_equal(*enc_meta, "rows", enc.rows(), c.encodings_path);
    expect_equal(*enc_meta, "dim", enc.dim(), c.encodings_path);
  }

  std::optional<Matrix> baseline;
  if (f.features) {
    const std::string path = require_input(*f.features, "--features");
    const auto features = backbone::import_layer_features(path);
    if (enc_meta) {
      // The baseline has to come from the features the encodings were built on.
      expect_equal(*enc_meta, "d", features.dim(), "encodings vs " + path);
      expect_equal(*enc_meta, "L", features.depth(), "encodings vs " + path);
    }
    if (features.entities() < g.num_users()) {
      throw MetadataError(path + ": " + std::to_string(features.entities()) +
                          " feature rows for a graph with " + std::to_string(g.num_users()) + " users");
    }
    baseline = backbone::mean_layer(features);
  }

  const auto report = eval::evaluate(enc.values, g, c.eval_options(), baseline ? &*baseline : nullptr);
  std::cout << eval::format_table(report);
  if (!c.report_path.empty()) {
    std::ofstream out(c.report_path);
    if (!out) throw Error("cannot open for writing: " + c.report_path);
    out << eval::format_key_values(report);
    Metadata meta;
    meta.set("artifact", "report");
    meta.set("encodings", c.encodings_path);
    if (f.features) meta.set("baseline_features", *f.features);
    if (enc_meta) meta.merge(*enc_meta, "encodings.");
    meta.merge(c.to_metadata(), "config.");
    meta.save(sidecar_path(c.report_path));
  }
  return 0;
}

std::vector<double> parse_numbers(std::string_view s, std::string_view what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    const auto tok = s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start);
    out.push_back(parse_real(tok, what));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// "x1,y1;x2,y2;..." -> one row per point.
ot::PointSet parse_points(const std::string& s, std::string_view what) {
  std::vector<std::vector<double>> rows;
  std::stringstream in(s);
  std::string row;
  while (std::getline(in, row, ';')) {
    if (!row.empty()) rows.push_back(parse_numbers(row, what));
  }
  if (rows.empty()) throw UsageError(std::string(what) + ": no points");
  ot::PointSet p(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != p.cols()) {
      throw UsageError(std::string(what) + ": point " + std::to_string(r + 1) + " has " +
                       std::to_string(rows[r].size()) + " coordinates, expected " +
                       std::to_string(p.cols()));
    }
    std::copy(rows[r].begin(), rows[r].end(), p.row(r).begin());
  }
  return p;
}

struct DistanceFlags {
  std::string p, q;
  std::optional<std::string> direction;
};

int cmd_distance(const Flags& f, const DistanceFlags& df) {
  const auto c = resolve(f);
  const auto p = parse_points(df.p, "--p");
  const auto q = parse_points(df.q, "--q");
  if (p.cols() != q.cols()) throw UsageError("--p and --q must have the same dimension");

  ProjectionSet proj;
  if (df.direction) {
    const auto dir = parse_numbers(*df.direction, "--direction");
    if (dir.size() != p.cols()) throw UsageError("--direction must have " + std::to_string(p.cols()) + " coordinates");
    Matrix m(1, dir.size());
    std::copy(dir.begin(), dir.end(), m.row(0).begin());
    proj = ProjectionSet::from_directions(std::move(m));
  } else {
    proj = encoder::sample_projections(c.slices, p.cols(), c.projection_seed);
  }

  if (p.cols() == 1) {
    std::printf("w2_1d=%.17g\n", ot::w2_1d(p.data(), q.data()));
  }
  std::printf("mc_sw2=%.17g\n", ot::mc_sw2(p, q, proj));
  std::printf("S=%zu d=%zu n=%zu\n", proj.count(), proj.dim(), p.rows());
  return 0;
}

struct BenchFlags {
  std::vector<std::size_t> entities{1000, 10000};
  std::vector<std::size_t> slices{64, 128};
  std::size_t dim = 64;
  std::size_t depth = 3;
  std::size_t reps = 3;
  std::uint64_t seed = 0;
};

int cmd_bench(const Flags& f, const BenchFlags& bf) {
  const auto c = resolve(f);
  std::vector<pipeline::BenchRow> rows;
  std::printf("%8s %6s %5s %3s %12s\n", "M", "S", "d", "L", "seconds");
  for (const auto m : bf.entities) {
    for (const auto s : bf.slices) {
      rows.push_back(pipeline::time_encode_all(m, s, bf.dim, bf.depth, bf.reps, bf.seed, c.threads));
      const auto& r = rows.back();
      std::printf("%8zu %6zu %5zu %3zu %12.6f\n", r.entities, r.slices, r.dim, r.depth, r.seconds);
    }
  }
  const auto find = [&](std::size_t m, std::size_t s) -> const pipeline::BenchRow* {
    for (const auto& r : rows) {
      if (r.entities == m && r.slices == s) return &r;
    }
    return nullptr;
  };
  const auto ns = bf.slices.size(), nm = bf.entities.size();
  if (nm >= 2) {
    const auto* a = find(bf.entities.front(), bf.slices.front());
    const auto* b = find(bf.entities.back(), bf.slices.front());
    std::printf("ratio_M(%zu->%zu)=%.3f\n", a->entities, b->entities, b->seconds / a->seconds);
  }
  if (ns >= 2) {
    const auto* a = find(bf.entities.front(), bf.slices.front());
    const auto* b = find(bf.entities.front(), bf.slices.back());
    std::printf("ratio_S(%zu->%zu)=%.3f\n", a->slices, b->slices, b->seconds / a->seconds);
  }
  return 0;
}

void add_backbone_flags(CLI::App* app, Flags& f) {
  app->add_option("--dim", f.dim, "Embedding dimension d");
  app->add_option("--depth,--L", f.depth, "Propagation depth L");
  app->add_option("--epochs", f.epochs, "Training epochs");
  app->add_option("--lr", f.lr, "Adam learning rate");
  app->add_option("--reg", f.reg, "L2 regularization weight");
  app->add_option("--batch-size", f.batch_size, "BPR mini-batch size");
  app->add_option("--train-seed", f.train_seed, "Initialization and sampling seed");
  app->add_flag("--include-items", f.include_items, "Also write item features");
}

void add_encoder_flags(CLI::App* app, Flags& f) {
  app->add_option("--S,--slices", f.slices, "Number of projections");
  app->add_option("--layout", f.layout, "concat, sum or max");
  app->add_option("--normalization", f.normalization, "isometric or paper");
  app->add_option("--projection-seed", f.projection_seed, "Projection seed");
  app->add_option("--reference-seed", f.reference_seed, "Reference sample seed");
  app->add_option("--reference-scale", f.reference_scale, "Reference std, or 'auto'");
}

void add_eval_flags(CLI::App* app, Flags& f) {
  app->add_option("--k", f.k_list, "Comma-separated cutoffs, e.g. 5,20,50,100");
  app->add_option("--queries", f.num_queries, "Sampled query users (0 = all)");
  app->add_option("--eval-seed", f.eval_seed, "Query sampling seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WSFE: sliced-Wasserstein user encodings for segmentation"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config_file, "key=value configuration file");
  app.add_option("--threads", f.threads, "Worker threads");

  auto* ingest = app.add_subcommand("ingest", "Load an interaction file and write a graph");
  ingest->add_option("--input", f.input, "Interaction TSV");
  ingest->add_option("--out", f.out, "Graph file to write");
  ingest->add_option("--format", f.format, "tsv_pairs or tsv_rated");
  ingest->add_option("--id-mode", f.id_mode, "dense or numeric");

  auto* train = app.add_subcommand("train", "Train the backbone and write layer features");
  train->add_option("--graph", f.graph, "Graph file");
  train->add_option("--out", f.out, "Feature file to write");
  add_backbone_flags(train, f);

  auto* encode = app.add_subcommand("encode", "Encode layer features");
  encode->add_option("--features", f.features, "Feature file");
  encode->add_option("--out", f.out, "Encoding file to write");
  add_encoder_flags(encode, f);

  auto* evaluate = app.add_subcommand("eval", "Similar-user retrieval metrics");
  evaluate->add_option("--graph", f.graph, "Graph file");
  evaluate->add_option("--encodings", f.encodings, "Encoding file");
  evaluate->add_option("--features", f.features, "Feature file for the mean-layer baseline");
  evaluate->add_option("--out", f.out, "Report file to write");
  add_eval_flags(evaluate, f);

  DistanceFlags df;
  auto* distance = app.add_subcommand("distance", "W2 / sliced W2 between two point sets");
  distance->add_option("--p", df.p, "Points as x,y;x,y;...")->required();
  distance->add_option("--q", df.q, "Points as x,y;x,y;...")->required();
  distance->add_option("--direction", df.direction, "Single projection direction x,y,...");
  distance->add_option("--S,--slices", f.slices, "Number of projections");
  distance->add_option("--projection-seed", f.projection_seed, "Projection seed");

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "Time encode_all over an (M, S) grid");
  bench->add_option("--M", bf.entities, "Entity counts")->delimiter(',');
  bench->add_option("--S", bf.slices, "Slice counts")->delimiter(',');
  bench->add_option("--d", bf.dim, "Feature dimension");
  bench->add_option("--L", bf.depth, "Propagation depth");
  bench->add_option("--reps", bf.reps, "Repetitions (best time is kept)");
  bench->add_option("--seed", bf.seed, "Data seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*ingest) return cmd_ingest(f);
    if (*train) return cmd_train(f);
    if (*encode) return cmd_encode(f);
    if (*evaluate) return cmd_eval(f);
    if (*distance) return cmd_distance(f, df);
    if (*bench) return cmd_bench(f, bf);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}
