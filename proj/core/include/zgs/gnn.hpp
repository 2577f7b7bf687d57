#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "zgs/embedding_table.hpp"
#include "zgs/zoograph.hpp"

namespace zgs {

enum class GnnKind { GraphSage, Gat };

struct GnnConfig {
  int input_dim = 32;  // dataset features are projected to this width when they differ
  int dim = 128;       // node state width (GraphSAGE: two halves of dim/2)
  int epochs = 200;
  double learning_rate = 0.01;
  std::uint64_t seed = 42;
  bool self_loops = true;  // GAT attends over N(i) plus i
};

void validate(const GnnConfig& config);

inline constexpr double kLeakySlope = 0.2;

/// Layer weights. GraphSAGE uses W and Q; GAT uses W and the attention vector
/// a = [a_self ; a_neighbor]. Nodes without input features take the default
/// vector of their kind, which is learned.
struct GnnParams {
  Eigen::MatrixXd W;
  Eigen::MatrixXd Q;
  Eigen::VectorXd a;
  Eigen::VectorXd model_default;
  Eigen::VectorXd dataset_default;
  std::uint64_t seed = 0;
};

/// One GraphSAGE layer: h_i' = [ReLU(W h_i) || sum_{n in N(i)} ReLU(Q h_n)],
/// N(i) the positive-edge neighbors of i.
std::map<NodeRef, Eigen::VectorXd> sage_forward(const ZooGraph& graph,
                                                const std::map<NodeRef, Eigen::VectorXd>& node_features,
                                                const GnnParams& params);

/// Softmax over N(i) of LeakyReLU(a^T [W h_i || W h_j]). Throws
/// EmptyNeighborhood when i has no positive-edge neighbor.
std::map<NodeRef, double> gat_attention(const NodeRef& node, const ZooGraph& graph,
                                        const std::map<NodeRef, Eigen::VectorXd>& states, const GnnParams& params);

/// One GAT layer: h_i' = LeakyReLU(sum_j alpha_ij W h_j).
std::map<NodeRef, Eigen::VectorXd> gat_forward(const ZooGraph& graph,
                                               const std::map<NodeRef, Eigen::VectorXd>& node_features,
                                               const GnnParams& params, bool self_loops = true);

struct LinkExample {
  std::size_t u;
  std::size_t v;
  double label;
};

/// Full-batch link prediction on a ZooGraph: one GNN layer, edge score
/// sigmoid(h_u . h_v), mean binary cross-entropy. Parameters are handled as a
/// flat vector so the analytic gradient can be checked numerically.
class LinkPredictionProblem {
 public:
  LinkPredictionProblem(const ZooGraph& graph, GnnKind kind, const GnnConfig& config);

  GnnKind kind() const noexcept { return kind_; }
  std::size_t num_params() const noexcept { return num_params_; }
  const std::vector<LinkExample>& examples() const noexcept { return examples_; }
  const std::vector<NodeRef>& nodes() const noexcept { return nodes_; }

  GnnParams initial_params() const;
  Eigen::VectorXd pack(const GnnParams& params) const;
  GnnParams unpack(const Eigen::VectorXd& theta) const;

  /// Node states, one column per node.
  Eigen::MatrixXd forward(const Eigen::VectorXd& theta) const;
  double loss(const Eigen::VectorXd& theta) const { return evaluate(theta, nullptr); }
  double loss_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const { return evaluate(theta, &grad); }
  /// Fraction of examples classified correctly at probability 0.5.
  double edge_accuracy(const Eigen::VectorXd& theta) const;

 private:
  double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const;
  Eigen::MatrixXd inputs(const GnnParams& p) const;

  GnnKind kind_;
  GnnConfig config_;
  std::vector<NodeRef> nodes_;
  std::vector<std::vector<std::size_t>> neighbors_;
  Eigen::MatrixXd fixed_inputs_;  // input_dim x n; valid where has_feature_
  std::vector<char> has_feature_;
  std::vector<LinkExample> examples_;
  Eigen::Index out_rows_ = 0;
  std::size_t num_params_ = 0;
};

struct LinkPredTrace {
  std::vector<double> loss;  // index 0 is the loss before the first update
  double final_accuracy = 0.0;
};

/// Trains a GraphSAGE or GAT layer for link prediction with Adam and returns
/// the final node states.
EmbeddingTable train_linkpred(const ZooGraph& graph, GnnKind kind, const GnnConfig& config,
                              LinkPredTrace* trace = nullptr);

}  // namespace zgs
