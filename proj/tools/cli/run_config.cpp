#include "run_config.hpp"

#include <fstream>
#include <set>

#include "zgs/error.hpp"

namespace zgs::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where.empty() ? what : where + ": " + what);
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

void check_object(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(join(where, key), "unknown key");
  }
}

double get_real(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

long long get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<long long>();
}

int get_small_int(const json& j, const std::string& where) {
  const auto v = get_int(j, where);
  if (v < -1'000'000'000LL || v > 1'000'000'000LL) fail(where, "integer out of range");
  return static_cast<int>(v);
}

std::uint64_t get_seed(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    fail(where, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::string_view aggregation_name(Aggregation a) { return a == Aggregation::Sum ? "sum" : "mean"; }

void apply_pipeline(const json& j, PipelineConfig& c, const std::string& where, bool allow_run_keys) {
  std::set<std::string> keys = {"id",     "seed",   "embedder", "predictor",    "features",    "graph",
                                "walk",   "gnn",    "forest",   "gbm",          "ridge_lambda", "aggregation",
                                "topk",   "min_target_std"};
  if (allow_run_keys) keys.insert({"strategies", "ratios", "synth", "zoo", "out"});
  check_object(j, where, keys);

  for (const auto& [key, v] : j.items()) {
    const auto at = join(where, key);
    if (key == "id") {
      c.id = get_string(v, at);
      if (c.id.empty()) fail(at, "must not be empty");
    } else if (key == "seed") {
      c.seed = get_seed(v, at);
    } else if (key == "embedder") {
      auto e = parse_embedder(get_string(v, at));
      if (!e) fail(at, "expected one of node2vec, node2vec_plus, graphsage, gat");
      c.embedder = *e;
    } else if (key == "predictor") {
      auto p = parse_predictor(get_string(v, at));
      if (!p) fail(at, "expected one of ridge, forest, gbm");
      c.predictor = *p;
    } else if (key == "features") {
      check_object(v, at, {"metadata", "similarity", "transfer_score", "graph"});
      if (v.contains("metadata")) c.features.use_metadata = get_bool(v["metadata"], join(at, "metadata"));
      if (v.contains("similarity")) c.features.use_similarity = get_bool(v["similarity"], join(at, "similarity"));
      if (v.contains("transfer_score")) {
        c.features.use_transfer_score = get_bool(v["transfer_score"], join(at, "transfer_score"));
      }
      if (v.contains("graph")) c.features.use_graph = get_bool(v["graph"], join(at, "graph"));
    } else if (key == "graph") {
      check_object(v, at, {"transfer_prune_threshold", "accuracy_prune_threshold", "negative_accuracy_threshold",
                           "dd_fully_connected"});
      for (const auto& [k, x] : v.items()) {
        const auto a = join(at, k);
        if (k == "transfer_prune_threshold") c.graph.transfer_prune_threshold = get_real(x, a);
        if (k == "accuracy_prune_threshold") c.graph.accuracy_prune_threshold = get_real(x, a);
        if (k == "negative_accuracy_threshold") c.graph.negative_accuracy_threshold = get_real(x, a);
        if (k == "dd_fully_connected") c.graph.dd_fully_connected = get_bool(x, a);
      }
    } else if (key == "walk") {
      check_object(v, at, {"p", "q", "walk_length", "walks_per_node", "window", "negatives", "dim", "epochs",
                           "learning_rate"});
      for (const auto& [k, x] : v.items()) {
        const auto a = join(at, k);
        if (k == "p") c.walk.p = get_real(x, a);
        if (k == "q") c.walk.q = get_real(x, a);
        if (k == "walk_length") c.walk.walk_length = get_small_int(x, a);
        if (k == "walks_per_node") c.walk.walks_per_node = get_small_int(x, a);
        if (k == "window") c.walk.window = get_small_int(x, a);
        if (k == "negatives") c.walk.negatives_per_positive = get_small_int(x, a);
        if (k == "dim") c.walk.dim = get_small_int(x, a);
        if (k == "epochs") c.walk.epochs = get_small_int(x, a);
        if (k == "learning_rate") c.walk.learning_rate = get_real(x, a);
      }
    } else if (key == "gnn") {
      check_object(v, at, {"input_dim", "epochs", "learning_rate", "self_loops"});
      for (const auto& [k, x] : v.items()) {
        const auto a = join(at, k);
        if (k == "input_dim") c.gnn.input_dim = get_small_int(x, a);
        if (k == "epochs") c.gnn.epochs = get_small_int(x, a);
        if (k == "learning_rate") c.gnn.learning_rate = get_real(x, a);
        if (k == "self_loops") c.gnn.self_loops = get_bool(x, a);
      }
    } else if (key == "forest") {
      check_object(v, at, {"trees", "max_depth"});
      if (v.contains("trees")) c.forest.trees = get_small_int(v["trees"], join(at, "trees"));
      if (v.contains("max_depth")) c.forest.max_depth = get_small_int(v["max_depth"], join(at, "max_depth"));
    } else if (key == "gbm") {
      check_object(v, at, {"trees", "max_depth", "shrinkage"});
      if (v.contains("trees")) c.gbm.trees = get_small_int(v["trees"], join(at, "trees"));
      if (v.contains("max_depth")) c.gbm.max_depth = get_small_int(v["max_depth"], join(at, "max_depth"));
      if (v.contains("shrinkage")) c.gbm.shrinkage = get_real(v["shrinkage"], join(at, "shrinkage"));
    } else if (key == "ridge_lambda") {
      c.ridge_lambda = get_real(v, at);
    } else if (key == "aggregation") {
      const auto s = get_string(v, at);
      if (s == "sum") {
        c.aggregation = Aggregation::Sum;
      } else if (s == "mean") {
        c.aggregation = Aggregation::Mean;
      } else {
        fail(at, "expected sum or mean");
      }
    } else if (key == "topk") {
      if (!v.is_array() || v.empty()) fail(at, "expected a non-empty array of integers");
      c.topk.clear();
      for (std::size_t i = 0; i < v.size(); ++i) c.topk.push_back(get_small_int(v[i], at + "[" + std::to_string(i) + "]"));
    } else if (key == "min_target_std") {
      c.min_target_std = get_real(v, at);
    }
  }
}

void apply_synth(const json& j, SynthConfig& c, const std::string& where) {
  check_object(j, where, {"n_models", "n_datasets", "latent_dim", "noise_std", "feature_dim", "seed",
                          "observed_fraction", "samples_per_dataset", "feature_noise_std", "transfer_scores",
                          "transfer_noise_std"});
  for (const auto& [k, x] : j.items()) {
    const auto a = join(where, k);
    if (k == "n_models") c.n_models = get_small_int(x, a);
    if (k == "n_datasets") c.n_datasets = get_small_int(x, a);
    if (k == "latent_dim") c.latent_dim = get_small_int(x, a);
    if (k == "noise_std") c.noise_std = get_real(x, a);
    if (k == "feature_dim") c.feature_dim = get_small_int(x, a);
    if (k == "seed") c.seed = get_seed(x, a);
    if (k == "observed_fraction") c.observed_fraction = get_real(x, a);
    if (k == "samples_per_dataset") c.samples_per_dataset = get_small_int(x, a);
    if (k == "feature_noise_std") c.feature_noise_std = get_real(x, a);
    if (k == "transfer_scores") c.transfer_scores = get_bool(x, a);
    if (k == "transfer_noise_std") c.transfer_noise_std = get_real(x, a);
  }
}

void check(const PipelineConfig& c, const std::string& where) {
  try {
    validate(c);
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig rc;
  apply_pipeline(doc, rc.pipeline, "", true);
  check(rc.pipeline, "config");

  if (doc.contains("strategies")) {
    const auto& list = doc["strategies"];
    if (!list.is_array() || list.empty()) fail("strategies", "expected a non-empty array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto where = "strategies[" + std::to_string(i) + "]";
      if (!list[i].is_object() || !list[i].contains("id")) fail(where, "every strategy needs an id");
      PipelineConfig c = rc.pipeline;
      apply_pipeline(list[i], c, where, false);
      check(c, where);
      if (!ids.insert(c.id).second) fail(where, "duplicate strategy id '" + c.id + "'");
      rc.strategies.push_back(std::move(c));
    }
  } else {
    rc.strategies.push_back(rc.pipeline);
  }

  if (doc.contains("ratios")) {
    const auto& r = doc["ratios"];
    if (!r.is_array() || r.empty()) fail("ratios", "expected a non-empty array");
    rc.ratios.clear();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double v = get_real(r[i], "ratios[" + std::to_string(i) + "]");
      if (!(v > 0.0 && v <= 1.0)) fail("ratios[" + std::to_string(i) + "]", "must lie in (0, 1]");
      rc.ratios.push_back(v);
    }
  }
  if (doc.contains("synth")) apply_synth(doc["synth"], rc.synth, "synth");
  try {
    validate(rc.synth);
  } catch (const Error& e) {
    fail("synth", e.what());
  }
  if (doc.contains("zoo")) rc.zoo = get_string(doc["zoo"], "zoo");
  if (doc.contains("out")) rc.out = get_string(doc["out"], "out");
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) raise(ErrorKind::MissingInput, "cannot open config " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": invalid JSON: " + e.what());
  }
  try {
    return parse_run_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

void override_seed(RunConfig& config, std::uint64_t seed) {
  config.pipeline.seed = seed;
  for (auto& s : config.strategies) s.seed = seed;
  config.synth.seed = seed;
}

void override_threads(RunConfig& config, unsigned threads) {
  config.pipeline.threads = threads;
  for (auto& s : config.strategies) s.threads = threads;
}

json to_json(const PipelineConfig& c) {
  json j;
  j["id"] = c.id;
  j["seed"] = c.seed;
  j["embedder"] = std::string(to_string(c.embedder));
  j["predictor"] = std::string(to_string(c.predictor));
  j["features"] = {{"metadata", c.features.use_metadata},
                   {"similarity", c.features.use_similarity},
                   {"transfer_score", c.features.use_transfer_score},
                   {"graph", c.features.use_graph}};
  j["graph"] = {{"transfer_prune_threshold", c.graph.transfer_prune_threshold},
                {"accuracy_prune_threshold", c.graph.accuracy_prune_threshold},
                {"negative_accuracy_threshold", c.graph.negative_accuracy_threshold},
                {"dd_fully_connected", c.graph.dd_fully_connected}};
  j["walk"] = {{"p", c.walk.p},
               {"q", c.walk.q},
               {"walk_length", c.walk.walk_length},
               {"walks_per_node", c.walk.walks_per_node},
               {"window", c.walk.window},
               {"negatives", c.walk.negatives_per_positive},
               {"dim", c.walk.dim},
               {"epochs", c.walk.epochs},
               {"learning_rate", c.walk.learning_rate}};
  j["gnn"] = {{"input_dim", c.gnn.input_dim},
              {"epochs", c.gnn.epochs},
              {"learning_rate", c.gnn.learning_rate},
              {"self_loops", c.gnn.self_loops}};
  j["forest"] = {{"trees", c.forest.trees}, {"max_depth", c.forest.max_depth}};
  j["gbm"] = {{"trees", c.gbm.trees}, {"max_depth", c.gbm.max_depth}, {"shrinkage", c.gbm.shrinkage}};
  j["ridge_lambda"] = c.ridge_lambda;
  j["aggregation"] = std::string(aggregation_name(c.aggregation));
  j["topk"] = c.topk;
  j["min_target_std"] = c.min_target_std;
  return j;
}

json to_json(const SynthConfig& c) {
  return {{"n_models", c.n_models},
          {"n_datasets", c.n_datasets},
          {"latent_dim", c.latent_dim},
          {"noise_std", c.noise_std},
          {"feature_dim", c.feature_dim},
          {"seed", c.seed},
          {"observed_fraction", c.observed_fraction},
          {"samples_per_dataset", c.samples_per_dataset},
          {"feature_noise_std", c.feature_noise_std},
          {"transfer_scores", c.transfer_scores},
          {"transfer_noise_std", c.transfer_noise_std}};
}

json to_json(const RunConfig& c) {
  json j = to_json(c.pipeline);
  j["strategies"] = json::array();
  for (const auto& s : c.strategies) j["strategies"].push_back(to_json(s));
  j["ratios"] = c.ratios;
  j["synth"] = to_json(c.synth);
  if (c.zoo) j["zoo"] = *c.zoo;
  if (c.out) j["out"] = *c.out;
  return j;
}

}  // namespace zgs::cli
