#include "zgs/skipgram.hpp"

#include <algorithm>
#include <cmath>

#include "zgs/error.hpp"
#include "zgs/rng.hpp"

namespace zgs {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + exp(-x)), stable for large |x|
double softplus_neg(double x) { return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

}  // namespace

EmbeddingTable train_skipgram(const WalkSet& walks, const WalkConfig& config, SkipGramTrace* trace) {
  validate(config);
  const auto n = walks.nodes.size();
  const auto dim = static_cast<Eigen::Index>(config.dim);
  std::size_t tokens = 0;
  std::vector<double> freq(n, 0.0);
  for (const auto& w : walks.walks) {
    tokens += w.size();
    for (auto v : w) {
      if (v >= n) raise(ErrorKind::ShapeError, "walk references unknown node index");
      freq[v] += 1.0;
    }
  }
  if (tokens == 0) raise(ErrorKind::EmptyInput, "no walks to train on");

  auto rng = make_rng(config.seed, 0x5eed'5eedULL);
  Eigen::MatrixXd center(dim, static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < center.cols(); ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) center(i, j) = (uniform01(rng) - 0.5) / static_cast<double>(dim);
  }
  Eigen::MatrixXd context = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(n));

  std::vector<double> noise_cdf(n);
  double acc = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    acc += std::pow(freq[v], 0.75);
    noise_cdf[v] = acc;
  }
  auto draw_noise = [&]() {
    const double r = uniform01(rng) * acc;
    auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), r);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - noise_cdf.begin(), static_cast<std::ptrdiff_t>(n) - 1));
  };

  const double total_steps = static_cast<double>(config.epochs) * static_cast<double>(tokens);
  double processed = 0.0;
  Eigen::VectorXd grad_center(dim);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss = 0.0;
    std::size_t pairs = 0;
    for (const auto& walk : walks.walks) {
      const auto len = static_cast<std::ptrdiff_t>(walk.size());
      for (std::ptrdiff_t i = 0; i < len; ++i) {
        const double lr = config.learning_rate * std::max(1e-4, 1.0 - processed / total_steps);
        processed += 1.0;
        const auto c = static_cast<Eigen::Index>(walk[static_cast<std::size_t>(i)]);
        const auto lo = std::max<std::ptrdiff_t>(0, i - config.window);
        const auto hi = std::min<std::ptrdiff_t>(len - 1, i + config.window);
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const auto pos = static_cast<Eigen::Index>(walk[static_cast<std::size_t>(j)]);
          grad_center.setZero();
          for (int k = 0; k <= config.negatives_per_positive; ++k) {
            Eigen::Index target = pos;
            double label = 1.0;
            if (k > 0) {
              target = static_cast<Eigen::Index>(draw_noise());
              if (target == pos) continue;
              label = 0.0;
            }
            const double score = center.col(c).dot(context.col(target));
            loss += label > 0.0 ? softplus_neg(score) : softplus_neg(-score);
            const double g = lr * (label - sigmoid(score));
            grad_center.noalias() += g * context.col(target);
            context.col(target).noalias() += g * center.col(c);
          }
          center.col(c) += grad_center;
          ++pairs;
        }
      }
    }
    if (trace) trace->epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }

  EmbeddingTable table(config.dim);
  for (std::size_t v = 0; v < n; ++v) table.set(walks.nodes[v], center.col(static_cast<Eigen::Index>(v)));
  return table;
}

}  // namespace zgs
