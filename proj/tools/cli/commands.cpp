#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "run_config.hpp"
#include "zgs/csv.hpp"
#include "zgs/error.hpp"
#include "zgs/evaluate.hpp"
#include "zgs/simfeat.hpp"
#include "zgs/synthzoo.hpp"
#include "zgs/transferability.hpp"
#include "zgs/zoograph.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace zgs::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string zoo;
  std::string config;
  std::string target;
  int top_k = 5;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<double> ratios;
};

unsigned thread_cap() {
  const char* env = std::getenv("ZGS_THREADS");
  if (!env || !*env) return std::max(1u, std::thread::hardware_concurrency());
  unsigned v = 0;
  const std::string_view s(env);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw UsageError("ZGS_THREADS must be a non-negative integer");
  return v;
}

RunConfig resolve(const Options& o) {
  RunConfig rc = o.config.empty() ? parse_run_config(json::object()) : load_run_config(o.config);
  if (o.seed) override_seed(rc, *o.seed);
  override_threads(rc, thread_cap());
  if (!o.ratios.empty()) rc.ratios = o.ratios;
  return rc;
}

fs::path zoo_dir(const Options& o, const RunConfig& rc) {
  if (!o.zoo.empty()) return o.zoo;
  if (rc.zoo) return *rc.zoo;
  throw UsageError("--zoo is required");
}

fs::path out_dir(const Options& o, const RunConfig& rc) {
  fs::path p;
  if (!o.out.empty()) {
    p = o.out;
  } else if (rc.out) {
    p = *rc.out;
  } else {
    throw UsageError("--out is required");
  }
  fs::create_directories(p);
  return p;
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) raise(ErrorKind::MissingInput, "cannot write " + file.string());
  return out;
}

void write_json(const json& j, const fs::path& file) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

std::string cell(const std::optional<double>& v) { return v ? csv::format_real(*v) : std::string(); }

std::optional<double> topk_of(const LooResult& r, int k) {
  if (static_cast<std::size_t>(k) > r.n_models) return std::nullopt;
  return topk_accuracy(std::span<const double>(r.scores.data(), r.n_models),
                       std::span<const double>(r.truth.data(), r.n_models), k, r.model_ids);
}

ZooGraph full_graph(const Zoo& zoo, const PipelineConfig& c, const std::string& target) {
  const auto phi = pipeline_similarity(zoo, c.aggregation);
  auto graph = build_graph(zoo, phi, c.graph, zoo_dataset_embeddings(zoo, c.aggregation));
  return target.empty() ? graph : remove_target_edges(graph, target);
}

EmbeddingTable embed(const Zoo& zoo, const PipelineConfig& c, const std::string& target) {
  auto walk = c.walk;
  walk.seed = c.seed;
  walk.threads = c.threads;
  auto gnn = c.gnn;
  gnn.seed = c.seed;
  return learn_embeddings(full_graph(zoo, c, target), c.embedder, walk, gnn);
}

int cmd_similarity(const Options& o, std::ostream& out) {
  const auto rc = resolve(o);
  const auto zoo = load_zoo(zoo_dir(o, rc));
  const auto dir = out_dir(o, rc);
  const auto embeddings = zoo_dataset_embeddings(zoo, rc.pipeline.aggregation);
  const auto phi = similarity_matrix(embeddings);
  fs::create_directories(dir / "dataset_embeddings");
  for (const auto& e : embeddings) write_dataset_embedding(e, dir / "dataset_embeddings" / (e.dataset_id + ".csv"));
  write_similarity_csv(phi, dir / "similarity.csv");
  out << "similarity: " << phi.dataset_ids().size() << " datasets -> " << (dir / "similarity.csv").string() << '\n';
  return 0;
}

int cmd_logme(const Options& o, std::ostream& out) {
  const auto rc = resolve(o);
  const auto root = zoo_dir(o, rc);
  const auto zoo = load_zoo(root);
  const auto sets = load_model_features(root);
  if (sets.empty()) raise(ErrorKind::MissingInput, "no model features under " + (root / "model_features").string());
  const auto scores = score_all(zoo, sets, rc.pipeline.threads);
  const auto merged = merge_transfer_scores(zoo.transfer_scores(), scores);
  const auto dir = o.out.empty() && !rc.out ? root : out_dir(o, rc);
  write_transfer_scores(merged, dir / "transfer_scores.csv");
  out << "logme: scored " << scores.size() << " pairs -> " << (dir / "transfer_scores.csv").string() << '\n';
  return 0;
}

int cmd_graph(const Options& o, std::ostream& out) {
  const auto rc = resolve(o);
  const auto zoo = load_zoo(zoo_dir(o, rc));
  const auto dir = out_dir(o, rc);
  const auto graph = full_graph(zoo, rc.pipeline, o.target);
  write_graph_csv(graph, dir / "graph.csv");
  out << "graph: " << graph.nodes().size() << " nodes, " << graph.edges().size() << " edges -> "
      << (dir / "graph.csv").string() << '\n';
  return 0;
}

int cmd_embed(const Options& o, std::ostream& out) {
  const auto rc = resolve(o);
  const auto zoo = load_zoo(zoo_dir(o, rc));
  const auto dir = out_dir(o, rc);
  const auto table = embed(zoo, rc.pipeline, o.target);
  table.write_csv(dir / "embeddings_nodes.csv");
  out << "embed: " << table.size() << " nodes (" << to_string(rc.pipeline.embedder) << ", dim " << table.dim()
      << ") -> " << (dir / "embeddings_nodes.csv").string() << '\n';
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto rc = resolve(o);
  const auto zoo = load_zoo(zoo_dir(o, rc));
  const auto dir = out_dir(o, rc);
  const auto fit = fit_pipeline(zoo, rc.pipeline, o.target);
  write_features_csv(fit.training_rows, fit.columns, dir / "features.csv");
  double sse = 0.0;
  for (const auto& r : fit.training_rows) {
    const double e = fit.model->predict(r.x) - *r.y;
    sse += e * e;
  }
  const double rmse = std::sqrt(sse / static_cast<double>(fit.training_rows.size()));
  write_json({{"config", to_json(rc.pipeline)},
              {"held_out", o.target},
              {"training_rows", fit.training_rows.size()},
              {"columns", fit.columns.size()},
              {"train_rmse", rmse}},
             dir / "train.json");
  out << "train: " << fit.training_rows.size() << " rows x " << fit.columns.size() << " columns, "
      << to_string(rc.pipeline.predictor) << " train RMSE " << csv::format_real(rmse) << '\n';
  return 0;
}

int cmd_predict(const Options& o, std::ostream& out) {
  if (o.target.empty()) throw UsageError("predict needs --target");
  if (o.top_k < 1) throw UsageError("--top-k must be positive");
  const auto rc = resolve(o);
  const auto zoo = load_zoo(zoo_dir(o, rc));
  const auto scores = score_target(zoo, rc.pipeline, o.target);
  if (!o.out.empty() || rc.out) write_scores_csv(scores, out_dir(o, rc) / "scores.csv");

  std::vector<std::size_t> order(scores.model_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores.S(static_cast<Eigen::Index>(a), 0), sb = scores.S(static_cast<Eigen::Index>(b), 0);
    if (sa != sb) return sa > sb;
    return scores.model_ids[a] < scores.model_ids[b];
  });
  const auto k = std::min(order.size(), static_cast<std::size_t>(o.top_k));
  out << "model_id,score\n";
  for (std::size_t i = 0; i < k; ++i) {
    out << scores.model_ids[order[i]] << ',' << csv::format_real(scores.S(static_cast<Eigen::Index>(order[i]), 0))
        << '\n';
  }
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const auto rc = resolve(o);
  const auto zoo = load_zoo(zoo_dir(o, rc));
  const auto dir = out_dir(o, rc);
  const auto report = compare_strategies(zoo, rc.strategies);

  {
    auto file = open_out(dir / "results.csv");
    csv::write_row(file, {"config_id", "target_dataset", "tau", "top1", "top5"});
    for (const auto& row : report.rows) {
      for (const auto& r : row.results) {
        csv::write_row(file, {row.config_id, r.target_dataset_id, csv::format_real(r.tau), cell(topk_of(r, 1)),
                              cell(topk_of(r, 5))});
      }
    }
  }

  embed(zoo, rc.strategies.front(), "").write_csv(dir / "embeddings_nodes.csv");

  json summary = json::array();
  for (const auto& row : report.rows) {
    summary.push_back({{"config_id", row.config_id},
                       {"mean_tau", row.n_targets ? json(row.mean_tau) : json(nullptr)},
                       {"targets", row.n_targets}});
  }
  write_json({{"config", to_json(rc)}, {"strategies", summary}, {"notes", report.notes}}, dir / "report.json");

  for (const auto& row : report.rows) {
    out << row.config_id << ": mean tau " << (row.n_targets ? csv::format_real(row.mean_tau) : "n/a") << " over "
        << row.n_targets << " targets\n";
  }
  for (const auto& n : report.notes) out << "note: " << n << '\n';
  return 0;
}

int cmd_ablate(const Options& o, std::ostream& out) {
  const auto rc = resolve(o);
  const auto zoo = load_zoo(zoo_dir(o, rc));
  const auto dir = out_dir(o, rc);
  auto file = open_out(dir / "ablation.csv");
  csv::write_row(file, {"config_id", "target_dataset", "ratio", "training_records", "tau", "top1", "top5", "note"});
  for (const auto& c : rc.strategies) {
    std::vector<std::string> targets;
    if (o.target.empty()) {
      targets = evaluation_targets(zoo, c.min_target_std);
    } else {
      targets.push_back(o.target);
    }
    for (const auto& t : targets) {
      for (const auto& [ratio, r] : ratio_ablation(zoo, c, t, rc.ratios)) {
        std::optional<double> tau, top1, top5;
        if (r.result) {
          tau = r.result->tau;
          top1 = topk_of(*r.result, 1);
          top5 = topk_of(*r.result, 5);
        }
        csv::write_row(file, {c.id, t, csv::format_real(ratio), std::to_string(r.training_records), cell(tau),
                              cell(top1), cell(top5), r.note});
        out << c.id << ' ' << t << " ratio " << csv::format_real(ratio) << ": "
            << (tau ? "tau " + csv::format_real(*tau) : "skipped (" + r.note + ")") << '\n';
      }
    }
  }
  return 0;
}

int cmd_synth(const Options& o, std::ostream& out) {
  const auto rc = resolve(o);
  const auto dir = out_dir(o, rc);
  const auto synth = generate(rc.synth);
  write_synth_zoo(synth, dir);
  out << "synth: " << synth.zoo.models().size() << " models, " << synth.zoo.datasets().size() << " datasets, "
      << synth.zoo.history().size() << " history rows -> " << dir.string() << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model-zoo selection engine: graph-learned fine-tuning performance prediction", "zgs"};
  app.require_subcommand(1);
  Options o;
  std::vector<std::pair<CLI::App*, int (*)(const Options&, std::ostream&)>> commands;

  auto add = [&](const char* name, const char* help, int (*fn)(const Options&, std::ostream&)) {
    auto* sub = app.add_subcommand(name, help);
    commands.emplace_back(sub, fn);
    return sub;
  };
  auto zoo = [&](CLI::App* s) { s->add_option("--zoo", o.zoo, "Zoo registry directory"); };
  auto config = [&](CLI::App* s) { s->add_option("--config", o.config, "JSON run configuration"); };
  auto outp = [&](CLI::App* s, const char* help) { s->add_option("--out", o.out, help); };
  auto seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "Seed override for every stage"); };
  auto target = [&](CLI::App* s, const char* help) { s->add_option("--target", o.target, help); };

  auto* s = add("similarity", "Dataset embeddings and pairwise similarity", cmd_similarity);
  zoo(s), config(s), outp(s, "Output directory");
  s = add("logme", "LogME transferability scores from model_features/", cmd_logme);
  zoo(s), config(s), outp(s, "Output directory (default: the zoo directory)");
  s = add("graph", "Build the model/dataset graph", cmd_graph);
  zoo(s), config(s), seed(s), outp(s, "Output directory"), target(s, "Drop this dataset's model edges");
  s = add("embed", "Learn node embeddings", cmd_embed);
  zoo(s), config(s), seed(s), outp(s, "Output directory"), target(s, "Drop this dataset's model edges first");
  s = add("train", "Assemble training rows and fit the predictor", cmd_train);
  zoo(s), config(s), seed(s), outp(s, "Output directory"), target(s, "Hold out this dataset");
  s = add("predict", "Rank models for a target dataset", cmd_predict);
  zoo(s), config(s), seed(s), outp(s, "Also write scores.csv here"), target(s, "Target dataset id");
  s->add_option("--top-k", o.top_k, "Rows to print")->capture_default_str();
  s = add("evaluate", "Leave-one-out evaluation of every configured strategy", cmd_evaluate);
  zoo(s), config(s), seed(s), outp(s, "Output directory");
  s = add("ablate", "Training-history ratio ablation", cmd_ablate);
  zoo(s), config(s), seed(s), outp(s, "Output directory"), target(s, "Single target (default: all)");
  s->add_option("--ratio", o.ratios, "Ratio in (0, 1]; repeatable")->check(CLI::Range(0.0, 1.0));
  s = add("synth", "Generate a synthetic zoo", cmd_synth);
  config(s), seed(s), outp(s, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn(o, out);
    }
    return 1;
  } catch (const UsageError& e) {
    err << "zgs: usage error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "zgs: configuration error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "zgs: error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "zgs: error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace zgs::cli
