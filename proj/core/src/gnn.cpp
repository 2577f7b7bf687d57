#include "zgs/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "zgs/error.hpp"
#include "zgs/rng.hpp"

namespace zgs {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double leaky(double x) { return x > 0.0 ? x : kLeakySlope * x; }
double leaky_grad(double x) { return x > 0.0 ? 1.0 : kLeakySlope; }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

using Neighborhoods = std::vector<std::vector<std::size_t>>;

// Undirected positive-edge neighborhoods, sorted, without self.
Neighborhoods positive_neighbors(const ZooGraph& graph) {
  std::vector<std::set<std::size_t>> sets(graph.nodes().size());
  for (const auto& e : graph.edges()) {
    if (e.label != EdgeLabel::Positive) continue;
    const auto a = *graph.index_of(e.a), b = *graph.index_of(e.b);
    sets[a].insert(b);
    sets[b].insert(a);
  }
  Neighborhoods out(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) out[i].assign(sets[i].begin(), sets[i].end());
  return out;
}

MatrixXd relu(const MatrixXd& m) { return m.cwiseMax(0.0); }

struct SageCache {
  MatrixXd S, P;
};

MatrixXd sage_layer(const MatrixXd& X, const MatrixXd& W, const MatrixXd& Q, const Neighborhoods& nb, SageCache* cache) {
  const Index h = W.rows();
  MatrixXd S = W * X;
  MatrixXd P = Q * X;
  const MatrixXd R = relu(P);
  MatrixXd out = MatrixXd::Zero(2 * h, X.cols());
  out.topRows(h) = relu(S);
  for (std::size_t i = 0; i < nb.size(); ++i) {
    for (auto n : nb[i]) out.bottomRows(h).col(static_cast<Index>(i)) += R.col(static_cast<Index>(n));
  }
  if (cache) {
    cache->S = std::move(S);
    cache->P = std::move(P);
  }
  return out;
}

// Returns dX; accumulates dW and dQ.
MatrixXd sage_backward(const MatrixXd& G, const MatrixXd& X, const MatrixXd& W, const MatrixXd& Q, const Neighborhoods& nb,
                       const SageCache& c, MatrixXd& dW, MatrixXd& dQ) {
  const Index h = W.rows();
  const MatrixXd Gs = G.topRows(h).cwiseProduct((c.S.array() > 0.0).cast<double>().matrix());
  MatrixXd acc = MatrixXd::Zero(h, X.cols());
  for (std::size_t i = 0; i < nb.size(); ++i) {
    for (auto n : nb[i]) acc.col(static_cast<Index>(n)) += G.bottomRows(h).col(static_cast<Index>(i));
  }
  const MatrixXd Gp = acc.cwiseProduct((c.P.array() > 0.0).cast<double>().matrix());
  dW += Gs * X.transpose();
  dQ += Gp * X.transpose();
  return W.transpose() * Gs + Q.transpose() * Gp;
}

struct GatCache {
  MatrixXd Z;
  MatrixXd C;
  std::vector<std::vector<std::size_t>> hood;
  std::vector<std::vector<double>> alpha;
  std::vector<std::vector<double>> pre;  // a^T [z_i || z_j] before LeakyReLU
};

std::vector<double> softmax(const std::vector<double>& e) {
  const double mx = *std::max_element(e.begin(), e.end());
  std::vector<double> out(e.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) sum += out[k] = std::exp(e[k] - mx);
  for (auto& v : out) v /= sum;
  return out;
}

MatrixXd gat_layer(const MatrixXd& X, const MatrixXd& W, const VectorXd& a, const Neighborhoods& nb, bool self_loops,
                   GatCache& c) {
  const Index h = W.rows();
  c.Z = W * X;
  const VectorXd s_self = c.Z.transpose() * a.head(h);
  const VectorXd s_nb = c.Z.transpose() * a.tail(h);
  const auto n = nb.size();
  c.hood.assign(n, {});
  c.alpha.assign(n, {});
  c.pre.assign(n, {});
  c.C = MatrixXd::Zero(h, X.cols());
  for (std::size_t i = 0; i < n; ++i) {
    auto& hood = c.hood[i];
    hood = nb[i];
    if (self_loops) hood.insert(std::lower_bound(hood.begin(), hood.end(), i), i);
    if (hood.empty()) continue;  // isolated without self-loop: zero state
    std::vector<double> e(hood.size());
    c.pre[i].resize(hood.size());
    for (std::size_t k = 0; k < hood.size(); ++k) {
      c.pre[i][k] = s_self(static_cast<Index>(i)) + s_nb(static_cast<Index>(hood[k]));
      e[k] = leaky(c.pre[i][k]);
    }
    c.alpha[i] = softmax(e);
    for (std::size_t k = 0; k < hood.size(); ++k) c.C.col(static_cast<Index>(i)) += c.alpha[i][k] * c.Z.col(static_cast<Index>(hood[k]));
  }
  return c.C.unaryExpr([](double x) { return leaky(x); });
}

MatrixXd gat_backward(const MatrixXd& G, const MatrixXd& X, const MatrixXd& W, const VectorXd& a, const GatCache& c,
                      MatrixXd& dW, VectorXd& da) {
  const Index h = W.rows();
  const MatrixXd dC = G.cwiseProduct(c.C.unaryExpr([](double x) { return leaky_grad(x); }));
  MatrixXd dZ = MatrixXd::Zero(h, X.cols());
  VectorXd ds_self = VectorXd::Zero(X.cols());
  VectorXd ds_nb = VectorXd::Zero(X.cols());
  for (std::size_t i = 0; i < c.hood.size(); ++i) {
    const auto& hood = c.hood[i];
    if (hood.empty()) continue;
    const auto ii = static_cast<Index>(i);
    std::vector<double> dalpha(hood.size());
    double weighted = 0.0;
    for (std::size_t k = 0; k < hood.size(); ++k) {
      const auto j = static_cast<Index>(hood[k]);
      dZ.col(j) += c.alpha[i][k] * dC.col(ii);
      dalpha[k] = dC.col(ii).dot(c.Z.col(j));
      weighted += c.alpha[i][k] * dalpha[k];
    }
    for (std::size_t k = 0; k < hood.size(); ++k) {
      const double de = c.alpha[i][k] * (dalpha[k] - weighted);
      const double du = de * leaky_grad(c.pre[i][k]);
      ds_self(ii) += du;
      ds_nb(static_cast<Index>(hood[k])) += du;
    }
  }
  da.head(h) += c.Z * ds_self;
  da.tail(h) += c.Z * ds_nb;
  dZ += a.head(h) * ds_self.transpose() + a.tail(h) * ds_nb.transpose();
  dW += dZ * X.transpose();
  return W.transpose() * dZ;
}

MatrixXd input_matrix(const ZooGraph& graph, const std::map<NodeRef, VectorXd>& features, const GnnParams& params) {
  const Index in = params.W.cols();
  MatrixXd X(in, static_cast<Index>(graph.nodes().size()));
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    const auto& node = graph.nodes()[i];
    auto it = features.find(node);
    const VectorXd& v = it != features.end() ? it->second
                        : node.kind == NodeKind::Model ? params.model_default
                                                       : params.dataset_default;
    if (v.size() != in) raise(ErrorKind::ShapeError, "input features of '" + node.id + "' do not match W");
    X.col(static_cast<Index>(i)) = v;
  }
  return X;
}

std::map<NodeRef, VectorXd> to_map(const ZooGraph& graph, const MatrixXd& H) {
  std::map<NodeRef, VectorXd> out;
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) out[graph.nodes()[i]] = H.col(static_cast<Index>(i));
  return out;
}

void fill_uniform(MatrixXd& m, double limit, std::mt19937_64& rng) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
  }
}

}  // namespace

void validate(const GnnConfig& c) {
  if (c.input_dim < 1 || c.dim < 2 || c.epochs < 0) raise(ErrorKind::InvalidArgument, "invalid GNN dimensions");
  if (!(c.learning_rate > 0.0)) raise(ErrorKind::InvalidArgument, "GNN learning_rate must be positive");
}

std::map<NodeRef, VectorXd> sage_forward(const ZooGraph& graph, const std::map<NodeRef, VectorXd>& node_features,
                                         const GnnParams& params) {
  if (params.Q.rows() != params.W.rows() || params.Q.cols() != params.W.cols()) {
    raise(ErrorKind::ShapeError, "GraphSAGE W and Q must have the same shape");
  }
  const MatrixXd X = input_matrix(graph, node_features, params);
  return to_map(graph, sage_layer(X, params.W, params.Q, positive_neighbors(graph), nullptr));
}

std::map<NodeRef, double> gat_attention(const NodeRef& node, const ZooGraph& graph,
                                        const std::map<NodeRef, VectorXd>& states, const GnnParams& params) {
  auto idx = graph.index_of(node);
  if (!idx) raise(ErrorKind::NotFound, "node '" + node.id + "' is not in the graph");
  const auto nb = positive_neighbors(graph);
  const auto& hood = nb[*idx];
  if (hood.empty()) raise(ErrorKind::EmptyNeighborhood, "node '" + node.id + "' has no neighbors");
  if (params.a.size() != 2 * params.W.rows()) raise(ErrorKind::ShapeError, "attention vector must have length 2*rows(W)");
  const MatrixXd X = input_matrix(graph, states, params);
  const Index h = params.W.rows();
  const VectorXd zi = params.W * X.col(static_cast<Index>(*idx));
  std::vector<double> e;
  for (auto j : hood) {
    const VectorXd zj = params.W * X.col(static_cast<Index>(j));
    e.push_back(leaky(params.a.head(h).dot(zi) + params.a.tail(h).dot(zj)));
  }
  const auto alpha = softmax(e);
  std::map<NodeRef, double> out;
  for (std::size_t k = 0; k < hood.size(); ++k) out[graph.nodes()[hood[k]]] = alpha[k];
  return out;
}

std::map<NodeRef, VectorXd> gat_forward(const ZooGraph& graph, const std::map<NodeRef, VectorXd>& node_features,
                                        const GnnParams& params, bool self_loops) {
  if (params.a.size() != 2 * params.W.rows()) raise(ErrorKind::ShapeError, "attention vector must have length 2*rows(W)");
  const MatrixXd X = input_matrix(graph, node_features, params);
  const auto nb = positive_neighbors(graph);
  if (!self_loops) {
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (nb[i].empty()) raise(ErrorKind::EmptyNeighborhood, "node '" + graph.nodes()[i].id + "' has no neighbors");
    }
  }
  GatCache cache;
  return to_map(graph, gat_layer(X, params.W, params.a, nb, self_loops, cache));
}

LinkPredictionProblem::LinkPredictionProblem(const ZooGraph& graph, GnnKind kind, const GnnConfig& config)
    : kind_(kind), config_(config), nodes_(graph.nodes()), neighbors_(positive_neighbors(graph)) {
  validate(config);
  if (kind == GnnKind::GraphSage && config.dim % 2 != 0) {
    raise(ErrorKind::InvalidArgument, "GraphSAGE state width must be even");
  }
  const auto n = nodes_.size();
  const Index in = config.input_dim;
  out_rows_ = kind == GnnKind::GraphSage ? config.dim / 2 : config.dim;

  // Dataset features: projected to input_dim when widths differ, then scaled to unit length.
  fixed_inputs_ = MatrixXd::Zero(in, static_cast<Index>(n));
  has_feature_.assign(n, 0);
  std::map<Index, MatrixXd> projections;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = graph.node_features().find(nodes_[i]);
    if (it == graph.node_features().end()) continue;
    VectorXd v = it->second;
    if (v.size() != in) {
      auto [pit, inserted] = projections.try_emplace(v.size());
      if (inserted) {
        auto rng = make_rng(config.seed, 0x9e37'0000ULL + static_cast<std::uint64_t>(v.size()));
        std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
        pit->second.resize(in, v.size());
        for (Index c = 0; c < v.size(); ++c) {
          for (Index r = 0; r < in; ++r) pit->second(r, c) = normal(rng);
        }
      }
      v = pit->second * v;
    }
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    fixed_inputs_.col(static_cast<Index>(i)) = v;
    has_feature_[i] = 1;
  }

  // Positive pairs (undirected, unique) and negatives: labeled negative
  // model-dataset edges, topped up with sampled non-edges to match positives.
  std::set<std::pair<std::size_t, std::size_t>> positives, negatives, any_edge;
  auto key = [](std::size_t a, std::size_t b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (const auto& e : graph.edges()) {
    const auto k = key(*graph.index_of(e.a), *graph.index_of(e.b));
    any_edge.insert(k);
    if (e.label == EdgeLabel::Positive) positives.insert(k);
  }
  for (const auto& e : graph.edges()) {
    if (e.label != EdgeLabel::Negative) continue;
    const auto k = key(*graph.index_of(e.a), *graph.index_of(e.b));
    if (!positives.count(k)) negatives.insert(k);  // a positive transfer edge overrides a weak accuracy edge
  }
  auto rng = make_rng(config.seed, 0x11c4'0000ULL);
  const std::size_t max_pairs = n * (n - 1) / 2;
  std::size_t attempts = 0;
  while (negatives.size() < positives.size() && any_edge.size() + negatives.size() < max_pairs &&
         attempts < 100 * positives.size() + 100) {
    ++attempts;
    const auto a = uniform_index(rng, n), b = uniform_index(rng, n);
    if (a == b) continue;
    const auto k = key(a, b);
    if (any_edge.count(k)) continue;
    negatives.insert(k);
  }
  if (positives.empty() || negatives.empty()) {
    raise(ErrorKind::DegenerateTraining, "link prediction needs both positive and negative examples");
  }
  for (auto [a, b] : positives) examples_.push_back({a, b, 1.0});
  for (auto [a, b] : negatives) examples_.push_back({a, b, 0.0});

  const auto h = static_cast<std::size_t>(out_rows_);
  const auto ind = static_cast<std::size_t>(in);
  num_params_ = kind == GnnKind::GraphSage ? 2 * h * ind + 2 * ind : h * ind + 2 * h + 2 * ind;
}

GnnParams LinkPredictionProblem::initial_params() const {
  const Index in = config_.input_dim, h = out_rows_;
  auto rng = make_rng(config_.seed, 0x6a77'0000ULL);
  GnnParams p;
  p.seed = config_.seed;
  const double limit = std::sqrt(6.0 / static_cast<double>(in + h));
  p.W.resize(h, in);
  fill_uniform(p.W, limit, rng);
  if (kind_ == GnnKind::GraphSage) {
    p.Q.resize(h, in);
    fill_uniform(p.Q, limit, rng);
  } else {
    MatrixXd a(2 * h, 1);
    fill_uniform(a, std::sqrt(6.0 / static_cast<double>(2 * h + 1)), rng);
    p.a = a.col(0);
  }
  MatrixXd defaults(in, 2);
  fill_uniform(defaults, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  p.model_default = defaults.col(0);
  p.dataset_default = defaults.col(1);
  return p;
}

VectorXd LinkPredictionProblem::pack(const GnnParams& p) const {
  VectorXd theta(static_cast<Index>(num_params_));
  Index o = 0;
  auto put = [&](const auto& m) {
    theta.segment(o, m.size()) = Eigen::Map<const VectorXd>(m.data(), m.size());
    o += m.size();
  };
  put(p.W);
  if (kind_ == GnnKind::GraphSage) {
    put(p.Q);
  } else {
    put(p.a);
  }
  put(p.model_default);
  put(p.dataset_default);
  return theta;
}

GnnParams LinkPredictionProblem::unpack(const VectorXd& theta) const {
  if (theta.size() != static_cast<Index>(num_params_)) raise(ErrorKind::ShapeError, "parameter vector has wrong length");
  const Index in = config_.input_dim, h = out_rows_;
  GnnParams p;
  p.seed = config_.seed;
  Index o = 0;
  auto take = [&](Index rows, Index cols) {
    MatrixXd m = Eigen::Map<const MatrixXd>(theta.data() + o, rows, cols);
    o += rows * cols;
    return m;
  };
  p.W = take(h, in);
  if (kind_ == GnnKind::GraphSage) {
    p.Q = take(h, in);
  } else {
    p.a = take(2 * h, 1).col(0);
  }
  p.model_default = take(in, 1).col(0);
  p.dataset_default = take(in, 1).col(0);
  return p;
}

MatrixXd LinkPredictionProblem::inputs(const GnnParams& p) const {
  MatrixXd X = fixed_inputs_;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (has_feature_[i]) continue;
    X.col(static_cast<Index>(i)) = nodes_[i].kind == NodeKind::Model ? p.model_default : p.dataset_default;
  }
  return X;
}

MatrixXd LinkPredictionProblem::forward(const VectorXd& theta) const {
  const auto p = unpack(theta);
  const MatrixXd X = inputs(p);
  if (kind_ == GnnKind::GraphSage) return sage_layer(X, p.W, p.Q, neighbors_, nullptr);
  GatCache cache;
  return gat_layer(X, p.W, p.a, neighbors_, config_.self_loops, cache);
}

double LinkPredictionProblem::evaluate(const VectorXd& theta, VectorXd* grad) const {
  const auto p = unpack(theta);
  const MatrixXd X = inputs(p);
  SageCache sage;
  GatCache gat;
  const MatrixXd H = kind_ == GnnKind::GraphSage ? sage_layer(X, p.W, p.Q, neighbors_, &sage)
                                                 : gat_layer(X, p.W, p.a, neighbors_, config_.self_loops, gat);
  const double m = static_cast<double>(examples_.size());
  double loss = 0.0;
  MatrixXd dH = MatrixXd::Zero(H.rows(), H.cols());
  for (const auto& ex : examples_) {
    const auto u = static_cast<Index>(ex.u), v = static_cast<Index>(ex.v);
    const double s = H.col(u).dot(H.col(v));
    loss += softplus(s) - ex.label * s;
    if (grad) {
      const double g = (sigmoid(s) - ex.label) / m;
      dH.col(u) += g * H.col(v);
      dH.col(v) += g * H.col(u);
    }
  }
  loss /= m;
  if (!grad) return loss;

  GnnParams d;
  d.W = MatrixXd::Zero(p.W.rows(), p.W.cols());
  MatrixXd dX;
  if (kind_ == GnnKind::GraphSage) {
    d.Q = MatrixXd::Zero(p.Q.rows(), p.Q.cols());
    dX = sage_backward(dH, X, p.W, p.Q, neighbors_, sage, d.W, d.Q);
  } else {
    d.a = VectorXd::Zero(p.a.size());
    dX = gat_backward(dH, X, p.W, p.a, gat, d.W, d.a);
  }
  d.model_default = VectorXd::Zero(p.model_default.size());
  d.dataset_default = VectorXd::Zero(p.dataset_default.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (has_feature_[i]) continue;
    (nodes_[i].kind == NodeKind::Model ? d.model_default : d.dataset_default) += dX.col(static_cast<Index>(i));
  }
  *grad = pack(d);
  return loss;
}

double LinkPredictionProblem::edge_accuracy(const VectorXd& theta) const {
  const MatrixXd H = forward(theta);
  std::size_t correct = 0;
  for (const auto& ex : examples_) {
    const double s = H.col(static_cast<Index>(ex.u)).dot(H.col(static_cast<Index>(ex.v)));
    if ((s >= 0.0) == (ex.label > 0.5)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples_.size());
}

EmbeddingTable train_linkpred(const ZooGraph& graph, GnnKind kind, const GnnConfig& config, LinkPredTrace* trace) {
  const LinkPredictionProblem problem(graph, kind, config);
  VectorXd theta = problem.pack(problem.initial_params());
  VectorXd m1 = VectorXd::Zero(theta.size()), m2 = VectorXd::Zero(theta.size()), grad;
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double loss = problem.loss_and_gradient(theta, grad);
    if (!std::isfinite(loss)) raise(ErrorKind::NumericalError, "link-prediction loss diverged");
    if (trace) trace->loss.push_back(loss);
    m1 = b1 * m1 + (1.0 - b1) * grad;
    m2 = b2 * m2 + (1.0 - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, epoch), c2 = 1.0 - std::pow(b2, epoch);
    theta.array() -= config.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
  }
  if (trace) {
    trace->loss.push_back(problem.loss(theta));
    trace->final_accuracy = problem.edge_accuracy(theta);
  }
  const MatrixXd H = problem.forward(theta);
  EmbeddingTable table(static_cast<int>(H.rows()));
  for (std::size_t i = 0; i < problem.nodes().size(); ++i) table.set(problem.nodes()[i], H.col(static_cast<Index>(i)));
  return table;
}

}  // namespace zgs
