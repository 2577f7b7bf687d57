#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "zgs/embed.hpp"
#include "zgs/error.hpp"
#include "zgs/gnn.hpp"

using namespace zgs;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ZooEdge md(const std::string& d, const std::string& m, EdgeLabel l = EdgeLabel::Positive) {
  return {dataset_node(d), model_node(m), EdgeKind::Performance, 1.0, l};
}

// d1 linked to m1, m2, m3; m3 also linked to d2 by a negative edge.
ZooGraph star() {
  return ZooGraph({dataset_node("d1"), dataset_node("d2"), model_node("m1"), model_node("m2"), model_node("m3")},
                  {md("d1", "m1"), md("d1", "m2"), md("d1", "m3"), md("d2", "m3", EdgeLabel::Negative)});
}

std::map<NodeRef, VectorXd> states2(std::initializer_list<std::pair<NodeRef, std::pair<double, double>>> xs) {
  std::map<NodeRef, VectorXd> out;
  for (const auto& [n, v] : xs) out[n] = (VectorXd(2) << v.first, v.second).finished();
  return out;
}

double leaky(double x) { return x > 0 ? x : 0.2 * x; }

ZooGraph random_graph(std::mt19937_64& rng, int datasets, int models) {
  std::vector<NodeRef> nodes;
  std::vector<ZooEdge> edges;
  for (int j = 0; j < datasets; ++j) nodes.push_back(dataset_node("d" + std::to_string(j)));
  for (int i = 0; i < models; ++i) nodes.push_back(model_node("m" + std::to_string(i)));
  for (int j = 0; j < datasets; ++j) {
    for (int i = 0; i < models; ++i) {
      const double u = uniform01(rng);
      edges.push_back(md("d" + std::to_string(j), "m" + std::to_string(i),
                         u < 0.6 ? EdgeLabel::Positive : EdgeLabel::Negative));
    }
  }
  std::map<NodeRef, VectorXd> features;
  for (int j = 0; j < datasets; ++j) features[nodes[static_cast<std::size_t>(j)]] = test::random_vector(rng, 6);
  return {nodes, edges, features};
}

}  // namespace

TEST_SUITE("gnn") {
  TEST_CASE("attention by hand") {
    GnnParams p;
    p.W = MatrixXd::Identity(2, 2);
    p.a = (VectorXd(4) << 0.5, -1.0, 1.0, 2.0).finished();
    p.model_default = VectorXd::Zero(2);
    p.dataset_default = VectorXd::Zero(2);
    const auto s = states2({{dataset_node("d1"), {1.0, 0.5}},
                            {model_node("m1"), {1.0, 0.0}},
                            {model_node("m2"), {-2.0, 0.5}},
                            {model_node("m3"), {0.0, -1.0}}});
    const auto alpha = gat_attention(dataset_node("d1"), star(), s, p);
    REQUIRE(alpha.size() == 3);
    const double self = 0.5 * 1.0 - 1.0 * 0.5;
    const double e1 = leaky(self + 1.0), e2 = leaky(self - 2.0 + 1.0), e3 = leaky(self - 2.0);
    const double z = std::exp(e1) + std::exp(e2) + std::exp(e3);
    CHECK(alpha.at(model_node("m1")) == doctest::Approx(std::exp(e1) / z).epsilon(1e-14));
    CHECK(alpha.at(model_node("m2")) == doctest::Approx(std::exp(e2) / z).epsilon(1e-14));
    CHECK(alpha.at(model_node("m3")) == doctest::Approx(std::exp(e3) / z).epsilon(1e-14));
  }

  TEST_CASE("attention over an isolated node") {
    GnnParams p;
    p.W = MatrixXd::Identity(2, 2);
    p.a = VectorXd::Ones(4);
    p.model_default = VectorXd::Zero(2);
    p.dataset_default = VectorXd::Zero(2);
    try {
      gat_attention(dataset_node("d2"), star(), {}, p);
      FAIL("expected EmptyNeighborhood");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EmptyNeighborhood);
    }
  }

  TEST_CASE("graphsage layer by hand") {
    GnnParams p;
    p.W = (MatrixXd(1, 2) << 1.0, -1.0).finished();
    p.Q = (MatrixXd(1, 2) << 0.5, 1.0).finished();
    p.model_default = VectorXd::Zero(2);
    p.dataset_default = VectorXd::Zero(2);
    const auto s = states2({{dataset_node("d1"), {2.0, 1.0}},
                            {dataset_node("d2"), {0.0, 3.0}},
                            {model_node("m1"), {1.0, 1.0}},
                            {model_node("m2"), {-4.0, 1.0}},
                            {model_node("m3"), {2.0, -0.5}}});
    const auto h = sage_forward(star(), s, p);
    const VectorXd& d1 = h.at(dataset_node("d1"));
    REQUIRE(d1.size() == 2);
    CHECK(d1(0) == 1.0);
    CHECK(d1(1) == doctest::Approx(1.5 + 0.0 + 0.5));
    const VectorXd& d2 = h.at(dataset_node("d2"));
    CHECK(d2(0) == 0.0);
    CHECK(d2(1) == 0.0);
    CHECK(h.at(model_node("m3"))(1) == doctest::Approx(2.0));
  }

  TEST_CASE("sage rejects mismatched halves") {
    GnnParams p;
    p.W = MatrixXd::Zero(2, 2);
    p.Q = MatrixXd::Zero(3, 2);
    CHECK_THROWS_AS(sage_forward(star(), {}, p), Error);
  }

  TEST_CASE("analytic gradients match central differences") {
    auto rng = make_rng(21);
    const auto g = random_graph(rng, 2, 4);
    for (auto kind : {GnnKind::GraphSage, GnnKind::Gat}) {
      GnnConfig c;
      c.input_dim = 3;
      c.dim = 4;
      const LinkPredictionProblem problem(g, kind, c);
      const VectorXd theta = problem.pack(problem.initial_params());
      VectorXd grad;
      problem.loss_and_gradient(theta, grad);
      for (Eigen::Index k = 0; k < theta.size(); ++k) {
        VectorXd hi = theta, lo = theta;
        hi(k) += 1e-5;
        lo(k) -= 1e-5;
        const double fd = (problem.loss(hi) - problem.loss(lo)) / 2e-5;
        CHECK(std::abs(fd - grad(k)) <= 1e-4 * std::max(1.0, std::abs(fd)));
      }
    }
  }

  TEST_CASE("pack and unpack round-trip") {
    auto rng = make_rng(2);
    const auto g = random_graph(rng, 3, 3);
    for (auto kind : {GnnKind::GraphSage, GnnKind::Gat}) {
      GnnConfig c;
      c.input_dim = 4;
      c.dim = 6;
      const LinkPredictionProblem problem(g, kind, c);
      const VectorXd theta = problem.pack(problem.initial_params());
      CHECK(problem.pack(problem.unpack(theta)) == theta);
      CHECK(theta.size() == static_cast<Eigen::Index>(problem.num_params()));
      CHECK_THROWS_AS(problem.unpack(VectorXd::Zero(theta.size() + 1)), Error);
    }
  }

  TEST_CASE("training lowers the link loss and fills every node") {
    auto rng = make_rng(8);
    const auto g = random_graph(rng, 4, 8);
    for (auto kind : {EmbedderKind::GraphSage, EmbedderKind::Gat}) {
      WalkConfig w;
      w.dim = 16;
      GnnConfig c;
      c.epochs = 60;
      const auto table = learn_embeddings(g, kind, w, c);
      CHECK(table.dim() == 16);
      CHECK(table.size() == g.nodes().size());
      for (const auto& [n, v] : table.vectors()) CHECK(v.allFinite());
      const auto again = learn_embeddings(g, kind, w, c);
      CHECK(again.vectors() == table.vectors());
    }
    GnnConfig c;
    c.dim = 16;
    c.epochs = 100;
    LinkPredTrace trace;
    train_linkpred(g, GnnKind::Gat, c, &trace);
    REQUIRE(trace.loss.size() == 101);
    CHECK(trace.loss.back() < trace.loss.front());
    CHECK(trace.final_accuracy > 0.5);
  }

  TEST_CASE("odd width is rejected for graphsage") {
    auto rng = make_rng(3);
    GnnConfig c;
    c.dim = 5;
    CHECK_THROWS_AS(LinkPredictionProblem(random_graph(rng, 2, 2), GnnKind::GraphSage, c), Error);
  }
}
