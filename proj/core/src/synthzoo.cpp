#include "zgs/synthzoo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "zgs/csv.hpp"
#include "zgs/error.hpp"
#include "zgs/rng.hpp"

namespace zgs {
namespace {

// Box-Muller on uniform01, so the stream is identical across standard libraries.
class Normal {
 public:
  explicit Normal(std::mt19937_64& rng) : rng_(rng) {}

  double operator()() {
    if (spare_) {
      spare_ = false;
      return cached_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform01(rng_);
    const double u2 = uniform01(rng_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * std::numbers::pi * u2);
    spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64& rng_;
  bool spare_ = false;
  double cached_ = 0.0;
};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string make_id(char prefix, int i, int n) {
  const int width = n > 100 ? 3 : 2;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*d", prefix, width, i);
  return buf;
}

}  // namespace

void validate(const SynthConfig& c) {
  if (c.n_models < 2) raise(ErrorKind::InvalidArgument, "synth: n_models must be at least 2");
  if (c.n_datasets < 3) raise(ErrorKind::InvalidArgument, "synth: n_datasets must be at least 3");
  if (c.latent_dim < 1) raise(ErrorKind::InvalidArgument, "synth: latent_dim must be positive");
  if (c.feature_dim < std::max(2, c.latent_dim)) {
    raise(ErrorKind::InvalidArgument, "synth: feature_dim must be at least max(2, latent_dim)");
  }
  if (!(c.noise_std >= 0.0) || !(c.feature_noise_std >= 0.0) || !(c.transfer_noise_std >= 0.0)) {
    raise(ErrorKind::InvalidArgument, "synth: noise levels must be non-negative");
  }
  if (!(c.observed_fraction > 0.0 && c.observed_fraction <= 1.0)) {
    raise(ErrorKind::InvalidArgument, "synth: observed_fraction must lie in (0, 1]");
  }
  if (c.samples_per_dataset < 1) raise(ErrorKind::InvalidArgument, "synth: samples_per_dataset must be positive");
}

SynthZoo generate(const SynthConfig& config) {
  validate(config);
  const int N = config.n_models, K = config.n_datasets, L = config.latent_dim, F = config.feature_dim;
  auto rng = make_rng(config.seed, 0);
  Normal normal(rng);

  SynthTruth truth;
  for (int i = 0; i < N; ++i) truth.model_ids.push_back(make_id('m', i, N));
  for (int j = 0; j < K; ++j) truth.dataset_ids.push_back(make_id('d', j, K));

  truth.V.resize(K, L);
  truth.dataset_bias.resize(K);
  for (int j = 0; j < K; ++j) {
    for (int l = 0; l < L; ++l) truth.V(j, l) = normal();
    truth.dataset_bias(j) = 0.5 * normal();
  }

  std::vector<int> pretrained(static_cast<std::size_t>(N));
  truth.U.resize(N, L);
  truth.model_bias.resize(N);
  for (int i = 0; i < N; ++i) {
    const int pre = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(K)));
    pretrained[static_cast<std::size_t>(i)] = pre;
    for (int l = 0; l < L; ++l) truth.U(i, l) = 0.8 * truth.V(pre, l) + 0.6 * normal();
    truth.model_bias(i) = 0.7 * normal();
  }

  truth.logit.resize(N, K);
  truth.accuracy.resize(N, K);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < K; ++j) {
      const double z = truth.U.row(i).dot(truth.V.row(j)) + truth.model_bias(i) + truth.dataset_bias(j);
      truth.logit(i, j) = z;
      truth.accuracy(i, j) = logistic(z + config.noise_std * normal());
    }
  }

  ZooData data;
  for (int j = 0; j < K; ++j) {
    DatasetCard d;
    d.dataset_id = truth.dataset_ids[static_cast<std::size_t>(j)];
    d.num_classes = std::max<std::int64_t>(2, std::llround(10.0 * std::exp(-0.8 * truth.dataset_bias(j))));
    d.num_samples = 1000 + static_cast<std::int64_t>(uniform_index(rng, 9000));
    d.modality = Modality::Image;
    data.datasets.push_back(d);
  }

  static const char* const kArchitectures[] = {"resnet", "vit", "convnext", "mobilenet"};
  static const std::int64_t kInputShapes[] = {224, 256, 384};
  for (int i = 0; i < N; ++i) {
    ModelCard m;
    m.model_id = truth.model_ids[static_cast<std::size_t>(i)];
    m.architecture = kArchitectures[uniform_index(rng, 4)];
    m.input_shape = kInputShapes[uniform_index(rng, 3)];
    const double log_params = 6.5 + 0.5 * truth.model_bias(i) + 0.5 * normal();
    m.num_params = std::llround(std::pow(10.0, log_params));
    m.memory_mb = 4.0 * static_cast<double>(m.num_params) / 1e6 * (1.0 + 0.05 * uniform01(rng));
    const int pre = pretrained[static_cast<std::size_t>(i)];
    m.pretrained_dataset_id = truth.dataset_ids[static_cast<std::size_t>(pre)];
    m.pretrained_accuracy = truth.accuracy(i, pre);
    data.models.push_back(m);
    data.history.push_back({m.model_id, *m.pretrained_dataset_id, truth.accuracy(i, pre), RecordKind::Pretrain});
  }

  std::vector<std::size_t> pairs(static_cast<std::size_t>(N) * static_cast<std::size_t>(K));
  for (std::size_t p = 0; p < pairs.size(); ++p) pairs[p] = p;
  const auto observed = static_cast<std::size_t>(std::floor(config.observed_fraction * static_cast<double>(pairs.size())));
  for (std::size_t p = 0; p < observed; ++p) std::swap(pairs[p], pairs[p + uniform_index(rng, pairs.size() - p)]);
  pairs.resize(observed);
  std::sort(pairs.begin(), pairs.end());
  for (auto p : pairs) {
    const auto i = static_cast<int>(p / static_cast<std::size_t>(K)), j = static_cast<int>(p % static_cast<std::size_t>(K));
    data.history.push_back({truth.model_ids[static_cast<std::size_t>(i)], truth.dataset_ids[static_cast<std::size_t>(j)],
                            truth.accuracy(i, j), RecordKind::Finetune});
  }

  for (int j = 0; j < K; ++j) {
    double sum = 0.0, sq = 0.0;
    int n = 0;
    for (auto p : pairs) {
      if (static_cast<int>(p % static_cast<std::size_t>(K)) != j) continue;
      const double a = truth.accuracy(static_cast<Eigen::Index>(p / static_cast<std::size_t>(K)), j);
      sum += a;
      sq += a * a;
      ++n;
    }
    const double sd = n > 1 ? std::sqrt(std::max(0.0, sq / n - (sum / n) * (sum / n))) : 0.0;
    if (!(sd > 0.01)) {
      raise(ErrorKind::DegenerateLabels, "synth: dataset '" + truth.dataset_ids[static_cast<std::size_t>(j)] +
                                             "' has accuracy std " + std::to_string(sd) + " (need > 0.01)");
    }
  }

  Eigen::MatrixXd gauss(F, F);
  for (int r = 0; r < F; ++r) {
    for (int c = 0; c < F; ++c) gauss(r, c) = normal();
  }
  const Eigen::MatrixXd rotation = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
  const int S = config.samples_per_dataset;
  for (int j = 0; j < K; ++j) {
    Eigen::VectorXd padded = Eigen::VectorXd::Zero(F);
    padded.head(L) = truth.V.row(j).transpose();
    const Eigen::VectorXd target = rotation * padded;
    SampleFeatureMatrix fm;
    fm.dataset_id = truth.dataset_ids[static_cast<std::size_t>(j)];
    fm.rows.resize(S, F);
    for (int s = 0; s < S; ++s) {
      for (int f = 0; f < F; ++f) fm.rows(s, f) = target(f) / S + config.feature_noise_std * normal();
    }
    data.features.emplace(fm.dataset_id, std::move(fm));
  }

  if (config.transfer_scores) {
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < K; ++j) {
        data.transfer_scores.push_back({truth.model_ids[static_cast<std::size_t>(i)],
                                        truth.dataset_ids[static_cast<std::size_t>(j)], TransferMethod::Ingested,
                                        truth.logit(i, j) + config.transfer_noise_std * normal()});
      }
    }
  }

  return {Zoo(std::move(data)), std::move(truth)};
}

void write_synth_zoo(const SynthZoo& synth, const std::filesystem::path& root) {
  save_zoo(synth.zoo, root);
  const auto file = root / "truth.csv";
  std::ofstream out(file, std::ios::binary);
  if (!out) raise(ErrorKind::MissingInput, "cannot write " + file.string());
  csv::write_row(out, {"model_id", "dataset_id", "true_logit"});
  const auto& t = synth.truth;
  for (std::size_t i = 0; i < t.model_ids.size(); ++i) {
    for (std::size_t j = 0; j < t.dataset_ids.size(); ++j) {
      csv::write_row(out, {t.model_ids[i], t.dataset_ids[j],
                           csv::format_real(t.logit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});
    }
  }
}

}  // namespace zgs
