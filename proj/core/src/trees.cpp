#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "zgs/error.hpp"
#include "zgs/predictor.hpp"
#include "zgs/rng.hpp"

namespace zgs {

using Orders = std::vector<std::vector<Eigen::Index>>;

namespace {

// Row order per feature, ascending by value with ties broken by row index.
Orders sorted_orders(const Eigen::MatrixXd& X) {
  Orders orders(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    auto& o = orders[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(X.rows()));
    std::iota(o.begin(), o.end(), Eigen::Index{0});
    std::stable_sort(o.begin(), o.end(), [&](Eigen::Index a, Eigen::Index b) { return X(a, f) < X(b, f); });
  }
  return orders;
}

}  // namespace

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Orders& orders,
              const RegressionTree::Params& params, std::mt19937_64* rng)
      : X_(X), y_(y), orders_(orders), params_(params), rng_(rng) {}

  RegressionTree build(const std::vector<int>& counts) {
    RegressionTree tree;
    grow(tree, counts, 0);
    return tree;
  }

 private:
  int grow(RegressionTree& tree, const std::vector<int>& counts, int depth) {
    double w = 0.0, s = 0.0;
    double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (!counts[i]) continue;
      const double yi = y_(static_cast<Eigen::Index>(i));
      w += counts[i];
      s += counts[i] * yi;
      y_min = std::min(y_min, yi);
      y_max = std::max(y_max, yi);
    }
    if (w == 0.0) raise(ErrorKind::InsufficientData, "tree node without samples");
    const int id = static_cast<int>(tree.nodes_.size());
    tree.nodes_.push_back({-1, 0.0, -1, -1, s / w});
    if (depth >= params_.max_depth || w < 2.0 || y_min == y_max) return id;

    const auto d = static_cast<int>(X_.cols());
    std::vector<int> features(static_cast<std::size_t>(d));
    std::iota(features.begin(), features.end(), 0);
    int take = params_.max_features > 0 ? std::min(params_.max_features, d) : d;
    if (take < d && rng_) {
      for (int k = 0; k < take; ++k) {
        const auto j = k + static_cast<int>(uniform_index(*rng_, static_cast<std::size_t>(d - k)));
        std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(j)]);
      }
      features.resize(static_cast<std::size_t>(take));
    }

    const double parent = s * s / w;
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (int f : features) {
      const auto& order = orders_[static_cast<std::size_t>(f)];
      double wl = 0.0, sl = 0.0;
      Eigen::Index prev = -1;
      for (auto row : order) {
        const int c = counts[static_cast<std::size_t>(row)];
        if (!c) continue;
        if (prev >= 0 && X_(row, f) > X_(prev, f)) {
          const double wr = w - wl, sr = s - sl;
          const double gain = sl * sl / wl + sr * sr / wr - parent;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = f;
            best_threshold = 0.5 * (X_(prev, f) + X_(row, f));
            if (!(best_threshold < X_(row, f))) best_threshold = X_(prev, f);
          }
        }
        wl += c;
        sl += c * y_(row);
        prev = row;
      }
    }
    if (best_feature < 0 || !(best_gain > 1e-14 * std::max(1.0, std::abs(parent)))) return id;

    std::vector<int> left(counts.size(), 0), right(counts.size(), 0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (!counts[i]) continue;
      (X_(static_cast<Eigen::Index>(i), best_feature) <= best_threshold ? left : right)[i] = counts[i];
    }
    const int l = grow(tree, left, depth + 1);
    const int r = grow(tree, right, depth + 1);
    auto& node = tree.nodes_[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  const Orders& orders_;
  RegressionTree::Params params_;
  std::mt19937_64* rng_;
};

RegressionTree RegressionTree::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& counts,
                                   const Params& params, std::mt19937_64* rng) {
  if (static_cast<Eigen::Index>(counts.size()) != X.rows() || y.size() != X.rows()) {
    raise(ErrorKind::ShapeError, "tree inputs disagree in row count");
  }
  const auto orders = sorted_orders(X);
  return TreeBuilder(X, y, orders, params, rng).build(counts);
}

double RegressionTree::predict(const Eigen::VectorXd& x) const {
  int i = 0;
  while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    i = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(i)].value;
}

int RegressionTree::depth() const {
  std::vector<int> depth(nodes_.size(), 0);
  int out = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    out = std::max(out, depth[i]);
    if (n.feature >= 0) {
      depth[static_cast<std::size_t>(n.left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(n.right)] = depth[i] + 1;
    }
  }
  return out;
}

ForestModel ForestModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& config) {
  if (X.rows() < 2) raise(ErrorKind::InsufficientData, "random forest needs at least two rows");
  if (config.trees < 1 || config.max_depth < 0) raise(ErrorKind::InvalidArgument, "invalid forest configuration");
  const auto orders = sorted_orders(X);
  RegressionTree::Params params{config.max_depth,
                                std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(X.cols())))))};
  ForestModel forest;
  const auto n = static_cast<std::size_t>(X.rows());
  for (int t = 0; t < config.trees; ++t) {
    auto rng = make_rng(config.seed, static_cast<std::uint64_t>(t));
    std::vector<int> counts(n, 0);
    for (std::size_t k = 0; k < n; ++k) ++counts[uniform_index(rng, n)];
    forest.trees_.push_back(TreeBuilder(X, y, orders, params, &rng).build(counts));
  }
  return forest;
}

double ForestModel::predict(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

GbmModel GbmModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbmConfig& config) {
  if (X.rows() < 2) raise(ErrorKind::InsufficientData, "gradient boosting needs at least two rows");
  if (config.trees < 0 || config.max_depth < 0 || !(config.shrinkage > 0.0 && config.shrinkage <= 1.0)) {
    raise(ErrorKind::InvalidArgument, "invalid boosting configuration");
  }
  const auto orders = sorted_orders(X);
  const std::vector<int> counts(static_cast<std::size_t>(X.rows()), 1);
  const RegressionTree::Params params{config.max_depth, 0};

  GbmModel model;
  model.base_ = y.mean();
  model.shrinkage_ = config.shrinkage;
  Eigen::VectorXd fitted = Eigen::VectorXd::Constant(y.size(), model.base_);
  model.mse_.push_back((y - fitted).squaredNorm() / static_cast<double>(y.size()));
  for (int t = 0; t < config.trees; ++t) {
    const Eigen::VectorXd residual = y - fitted;
    auto tree = TreeBuilder(X, residual, orders, params, nullptr).build(counts);
    for (Eigen::Index i = 0; i < X.rows(); ++i) fitted(i) += config.shrinkage * tree.predict(X.row(i).transpose());
    model.trees_.push_back(std::move(tree));
    model.mse_.push_back((y - fitted).squaredNorm() / static_cast<double>(y.size()));
  }
  return model;
}

double GbmModel::predict(const Eigen::VectorXd& x) const {
  double out = base_;
  for (const auto& t : trees_) out += shrinkage_ * t.predict(x);
  return out;
}

}  // namespace zgs
