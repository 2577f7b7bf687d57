#include "zgs/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "zgs/error.hpp"
#include "zgs/parallel.hpp"
#include "zgs/rng.hpp"
#include "zgs/simfeat.hpp"

namespace zgs {

void validate(const PipelineConfig& config) {
  if (!config.features.any()) raise(ErrorKind::InvalidArgument, "pipeline '" + config.id + "' selects no feature group");
  validate(config.walk);
  validate(config.gnn);
  if (config.forest.trees < 1 || config.forest.max_depth < 0) {
    raise(ErrorKind::InvalidArgument, "pipeline '" + config.id + "': invalid forest settings");
  }
  if (config.gbm.trees < 0 || config.gbm.max_depth < 0 || !(config.gbm.shrinkage > 0.0 && config.gbm.shrinkage <= 1.0)) {
    raise(ErrorKind::InvalidArgument, "pipeline '" + config.id + "': invalid boosting settings");
  }
  if (!(config.ridge_lambda >= 0.0)) raise(ErrorKind::InvalidArgument, "ridge lambda must be non-negative");
  for (int k : config.topk) {
    if (k < 1) raise(ErrorKind::InvalidK, "top-k values must be positive");
  }
  if (!(config.min_target_std >= 0.0)) raise(ErrorKind::InvalidArgument, "min_target_std must be non-negative");
}

bool LooResult::operator==(const LooResult& o) const {
  return target_dataset_id == o.target_dataset_id && tau == o.tau && topk_accuracy == o.topk_accuracy &&
         n_models == o.n_models && model_ids == o.model_ids && scores.size() == o.scores.size() &&
         scores == o.scores && truth.size() == o.truth.size() && truth == o.truth && training_rows == o.training_rows;
}

double pearson(std::span<const double> s, std::span<const double> t) {
  if (s.size() != t.size()) raise(ErrorKind::ShapeError, "pearson: vectors differ in length");
  if (s.size() < 2) raise(ErrorKind::InsufficientData, "pearson: need at least two values");
  const auto n = static_cast<double>(s.size());
  double ms = 0.0, mt = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i]) || !std::isfinite(t[i])) raise(ErrorKind::NumericalError, "pearson: non-finite input");
    ms += s[i];
    mt += t[i];
  }
  ms /= n;
  mt /= n;
  double st = 0.0, ss = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double ds = s[i] - ms, dt = t[i] - mt;
    st += dt * ds;
    ss += ds * ds;
    tt += dt * dt;
  }
  if (ss == 0.0) raise(ErrorKind::DegenerateVector, "pearson: predicted scores are constant");
  if (tt == 0.0) raise(ErrorKind::DegenerateVector, "pearson: ground truth is constant");
  return std::clamp(st / std::sqrt(tt * ss), -1.0, 1.0);
}

double pearson(const Eigen::VectorXd& s, const Eigen::VectorXd& t) {
  return pearson(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())),
                 std::span<const double>(t.data(), static_cast<std::size_t>(t.size())));
}

double topk_accuracy(std::span<const double> s, std::span<const double> t, int k, std::span<const std::string> ids) {
  if (s.size() != t.size() || (!ids.empty() && ids.size() != s.size())) {
    raise(ErrorKind::ShapeError, "top-k: inputs differ in length");
  }
  if (k < 1 || static_cast<std::size_t>(k) > s.size()) {
    raise(ErrorKind::InvalidK, "top-k: k=" + std::to_string(k) + " with " + std::to_string(s.size()) + " models");
  }
  for (double v : s) {
    if (std::isnan(v)) raise(ErrorKind::NumericalError, "top-k: NaN score");
  }
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s[a] != s[b]) return s[a] > s[b];
    return ids.empty() ? a < b : ids[a] < ids[b];
  });
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += t[order[static_cast<std::size_t>(i)]];
  return sum / k;
}

SimilarityMatrix pipeline_similarity(const Zoo& zoo, Aggregation aggregation) {
  return similarity_matrix(zoo_dataset_embeddings(zoo, aggregation));
}

namespace {

PredictorModel train_predictor(const std::vector<FeatureRow>& rows, const PipelineConfig& config) {
  switch (config.predictor) {
    case PredictorKind::Ridge:
      return train_ridge(rows, config.ridge_lambda);
    case PredictorKind::Forest: {
      auto cfg = config.forest;
      cfg.seed = config.seed;
      return train_forest(rows, cfg);
    }
    case PredictorKind::Gbm: {
      auto cfg = config.gbm;
      cfg.seed = config.seed;
      return train_gbm(rows, cfg);
    }
  }
  raise(ErrorKind::InvalidArgument, "unknown predictor");
}

}  // namespace

PipelineFit fit_pipeline(const Zoo& zoo, const PipelineConfig& config, const std::string& held_out,
                         const LooHooks& hooks) {
  validate(config);
  if (!held_out.empty() && !zoo.find_dataset(held_out)) {
    raise(ErrorKind::NotFound, "unknown target dataset '" + held_out + "'");
  }
  PipelineFit fit;
  fit.config = config;
  const bool need_phi = config.features.use_similarity || config.features.use_graph;
  if (need_phi) fit.phi = pipeline_similarity(zoo, config.aggregation);

  fit.embeddings = EmbeddingTable(config.walk.dim);
  if (config.features.use_graph) {
    auto graph = build_graph(zoo, fit.phi, config.graph, zoo_dataset_embeddings(zoo, config.aggregation));
    if (!held_out.empty()) graph = remove_target_edges(graph, held_out);
    auto walk = config.walk;
    walk.seed = config.seed;
    walk.threads = config.threads;
    auto gnn = config.gnn;
    gnn.seed = config.seed;
    fit.embeddings = learn_embeddings(graph, config.embedder, walk, gnn);
    if (hooks.on_embeddings) hooks.on_embeddings(fit.embeddings);
  }

  for (const auto& r : zoo.history()) {
    if (r.kind == RecordKind::Finetune && r.dataset_id != held_out) fit.training_pairs.push_back({r.model_id, r.dataset_id});
  }
  if (fit.training_pairs.size() < 2) raise(ErrorKind::InsufficientData, "fewer than two fine-tune records to train on");

  FeatureAssembler assembler(zoo, need_phi ? &fit.phi : nullptr, config.features.use_graph ? &fit.embeddings : nullptr,
                             config.features);
  assembler.fit_vocabulary(fit.training_pairs);
  fit.training_rows = assembler.assemble(fit.training_pairs);
  fit.columns = assembler.column_names();
  if (hooks.on_training_rows) hooks.on_training_rows(fit.training_rows);
  fit.model = train_predictor(fit.training_rows, config);
  return fit;
}

ScoreMatrix PipelineFit::score(const Zoo& zoo, const std::vector<std::string>& datasets) const {
  if (!model) raise(ErrorKind::InvalidArgument, "pipeline has no trained predictor");
  const bool need_phi = config.features.use_similarity || config.features.use_graph;
  FeatureAssembler assembler(zoo, need_phi ? &phi : nullptr, config.features.use_graph ? &embeddings : nullptr,
                             config.features);
  assembler.fit_vocabulary(training_pairs);
  std::vector<ModelDatasetPair> query;
  for (const auto& d : datasets) {
    if (!zoo.find_dataset(d)) raise(ErrorKind::NotFound, "unknown dataset '" + d + "'");
    for (const auto& m : zoo.models()) query.push_back({m.model_id, d});
  }
  return predict(*model, assembler.assemble(query));
}

ScoreMatrix score_target(const Zoo& zoo, const PipelineConfig& config, const std::string& target,
                         const LooHooks& hooks) {
  if (target.empty()) raise(ErrorKind::InvalidArgument, "target dataset id is empty");
  return fit_pipeline(zoo, config, target, hooks).score(zoo, {target});
}

LooResult loo_evaluate(const Zoo& zoo, const PipelineConfig& config, const std::string& target, const LooHooks& hooks) {
  validate(config);
  if (!zoo.find_dataset(target)) raise(ErrorKind::NotFound, "unknown target dataset '" + target + "'");

  LooResult out;
  out.target_dataset_id = target;
  std::vector<std::size_t> rows;
  std::vector<double> truth;
  for (std::size_t i = 0; i < zoo.models().size(); ++i) {
    const auto& id = zoo.models()[i].model_id;
    if (auto acc = zoo.finetune_accuracy(id, target)) {
      out.model_ids.push_back(id);
      rows.push_back(i);
      truth.push_back(*acc);
    }
  }
  if (truth.size() < 2) {
    raise(ErrorKind::InsufficientData, "target '" + target + "' has fewer than two fine-tune records");
  }

  LooHooks inner = hooks;
  inner.on_training_rows = [&](const std::vector<FeatureRow>& r) {
    out.training_rows = r.size();
    if (hooks.on_training_rows) hooks.on_training_rows(r);
  };
  const auto scores = score_target(zoo, config, target, inner);

  out.n_models = out.model_ids.size();
  out.scores.resize(static_cast<Eigen::Index>(out.n_models));
  out.truth = Eigen::Map<const Eigen::VectorXd>(truth.data(), static_cast<Eigen::Index>(truth.size()));
  for (std::size_t k = 0; k < out.n_models; ++k) {
    out.scores(static_cast<Eigen::Index>(k)) = scores.S(static_cast<Eigen::Index>(rows[k]), 0);
  }
  out.tau = pearson(out.scores, out.truth);
  const std::span<const double> s(out.scores.data(), out.n_models), t(truth);
  for (int k : config.topk) {
    if (static_cast<std::size_t>(k) <= out.n_models) out.topk_accuracy[k] = topk_accuracy(s, t, k, out.model_ids);
  }
  return out;
}

std::vector<TrainingRecord> subsample_history(const Zoo& zoo, const std::string& target, double ratio,
                                              std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) raise(ErrorKind::InvalidArgument, "ratio must lie in (0, 1]");
  const auto& history = zoo.history();
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (history[i].dataset_id != target) pool.push_back(i);
  }
  const auto take = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(pool.size())));
  auto rng = make_rng(seed, 0x7261'7469'6fULL);
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<char> keep(history.size(), 0);
  for (std::size_t i = 0; i < take; ++i) keep[pool[i]] = 1;
  std::vector<TrainingRecord> out;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (keep[i] || history[i].dataset_id == target) out.push_back(history[i]);
  }
  return out;
}

std::map<double, RatioOutcome> ratio_ablation(const Zoo& zoo, const PipelineConfig& config, const std::string& target,
                                              const std::vector<double>& ratios) {
  std::set<std::string> covered;
  for (const auto& r : zoo.history()) {
    if (r.dataset_id != target) covered.insert(r.dataset_id);
  }

  std::map<double, RatioOutcome> out;
  for (double ratio : ratios) {
    RatioOutcome o;
    o.ratio = ratio;
    auto history = subsample_history(zoo, target, ratio, config.seed);
    std::set<std::string> left;
    for (const auto& r : history) {
      if (r.dataset_id != target) {
        left.insert(r.dataset_id);
        ++o.training_records;
      }
    }
    for (const auto& d : covered) {
      if (!left.count(d)) {
        o.note = "ratio " + std::to_string(ratio) + " leaves dataset '" + d + "' without records";
        break;
      }
    }
    if (o.note.empty()) {
      auto data = zoo.data();
      data.history = std::move(history);
      o.result = loo_evaluate(Zoo(std::move(data)), config, target);
    }
    out[ratio] = std::move(o);
  }
  return out;
}

std::vector<std::string> evaluation_targets(const Zoo& zoo, double min_std, std::vector<std::string>* notes) {
  std::vector<std::string> out;
  for (const auto& d : zoo.datasets()) {
    std::vector<double> acc;
    for (const auto& m : zoo.models()) {
      if (auto a = zoo.finetune_accuracy(m.model_id, d.dataset_id)) acc.push_back(*a);
    }
    if (acc.size() < 2) {
      if (notes) notes->push_back("skipped '" + d.dataset_id + "': fewer than two fine-tune records");
      continue;
    }
    const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
    double var = 0.0;
    for (double a : acc) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(acc.size()));
    if (sd < min_std) {
      if (notes) notes->push_back("skipped '" + d.dataset_id + "': accuracy std " + std::to_string(sd) + " below " + std::to_string(min_std));
      continue;
    }
    out.push_back(d.dataset_id);
  }
  return out;
}

StrategyReport compare_strategies(const Zoo& zoo, const std::vector<PipelineConfig>& configs) {
  StrategyReport report;
  struct Job {
    std::size_t config;
    std::string target;
  };
  std::vector<Job> jobs;
  unsigned threads = 0;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    validate(configs[c]);
    threads = std::max(threads, configs[c].threads);
    std::vector<std::string> notes;
    for (auto& t : evaluation_targets(zoo, configs[c].min_target_std, &notes)) jobs.push_back({c, std::move(t)});
    for (auto& n : notes) report.notes.push_back(configs[c].id + ": " + n);
  }

  std::vector<std::optional<LooResult>> results(jobs.size());
  std::vector<std::string> failures(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    auto cfg = configs[jobs[j].config];
    if (threads > 1) cfg.threads = 0;
    try {
      results[j] = loo_evaluate(zoo, cfg, jobs[j].target);
    } catch (const Error& e) {
      failures[j] = cfg.id + ": target '" + jobs[j].target + "' failed: " + e.what();
    }
  });

  report.rows.resize(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) report.rows[c].config_id = configs[c].id;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!failures[j].empty()) report.notes.push_back(failures[j]);
    if (results[j]) report.rows[jobs[j].config].results.push_back(std::move(*results[j]));
  }
  for (auto& row : report.rows) {
    row.n_targets = row.results.size();
    double sum = 0.0;
    for (const auto& r : row.results) sum += r.tau;
    row.mean_tau = row.n_targets ? sum / static_cast<double>(row.n_targets) : std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace zgs
