#include <map>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "zgs/error.hpp"
#include "zgs/rng.hpp"
#include "zgs/walks.hpp"

using namespace zgs;

namespace {

ZooEdge md(const std::string& d, const std::string& m, double w, EdgeLabel l = EdgeLabel::Positive) {
  return {dataset_node(d), model_node(m), EdgeKind::Performance, w, l};
}

std::vector<ZooEdge> dd(const std::string& a, const std::string& b, double phi) {
  return {{dataset_node(a), dataset_node(b), EdgeKind::DatasetSimilarity, phi, EdgeLabel::Positive},
          {dataset_node(b), dataset_node(a), EdgeKind::DatasetSimilarity, phi, EdgeLabel::Positive}};
}

// t = d1, v = m1, x = d2
ZooGraph path_graph() {
  return ZooGraph({dataset_node("d1"), dataset_node("d2"), model_node("m1")}, {md("d1", "m1", 1.0), md("d2", "m1", 1.0)});
}

ZooGraph triangle(double phi) {
  auto edges = dd("d1", "d2", phi);
  edges.push_back(md("d1", "m1", 1.0));
  edges.push_back(md("d2", "m1", 1.0));
  return ZooGraph({dataset_node("d1"), dataset_node("d2"), model_node("m1")}, edges);
}

WalkConfig config(double p, double q) {
  WalkConfig c;
  c.p = p;
  c.q = q;
  return c;
}

}  // namespace

TEST_SUITE("walks") {
  TEST_CASE("unit weights with p = q = 1 give a uniform step") {
    const ZooGraph g({dataset_node("d1"), model_node("m1"), model_node("m2"), model_node("m3")},
                     {md("d1", "m1", 1.0), md("d1", "m2", 1.0), md("d1", "m3", 1.0)});
    const auto w = transition_weights(model_node("m1"), dataset_node("d1"), g, config(1, 1), WalkVariant::Node2Vec);
    REQUIRE(w.size() == 3);
    for (const auto& [node, weight] : w) CHECK(weight == 1.0);
  }

  TEST_CASE("path graph: return and outward biases") {
    const auto w = transition_weights(dataset_node("d1"), model_node("m1"), path_graph(), config(1, 4),
                                      WalkVariant::Node2Vec);
    CHECK(w.at(dataset_node("d1")) == 1.0);
    CHECK(w.at(dataset_node("d2")) == 0.25);
  }

  TEST_CASE("triangle: neighbor of the previous node keeps bias one") {
    const auto w = transition_weights(dataset_node("d1"), model_node("m1"), triangle(1.0), config(2, 4),
                                      WalkVariant::Node2Vec);
    CHECK(w.at(dataset_node("d1")) == 0.5);
    CHECK(w.at(dataset_node("d2")) == 1.0);
  }

  TEST_CASE("similarity weights map to [0, 1]") {
    const WalkGraph wg(triangle(-0.5));
    CHECK(wg.weight(0, 1).value() == 0.25);
    CHECK(wg.weight(1, 0).value() == 0.25);
    CHECK(wg.weight(2, 0).value() == 1.0);  // model -> dataset traversal
  }

  TEST_CASE("node2vec+ counts only strong edges as adjacency") {
    // d1's out-weights: m1 = 1.0, d2 = (−0.5 + 1)/2 = 0.25; mean 0.625.
    const auto g = triangle(-0.5);
    const auto plain = transition_weights(dataset_node("d1"), model_node("m1"), g, config(1, 4), WalkVariant::Node2Vec);
    const auto plus = transition_weights(dataset_node("d1"), model_node("m1"), g, config(1, 4), WalkVariant::Node2VecPlus);
    CHECK(plain.at(dataset_node("d2")) == 1.0);
    CHECK(plus.at(dataset_node("d2")) == 0.25);
    const auto strong = triangle(0.9);  // 0.95 < mean 0.975
    const auto s = transition_weights(dataset_node("d1"), model_node("m1"), strong, config(1, 4), WalkVariant::Node2VecPlus);
    CHECK(s.at(dataset_node("d2")) == 0.25);
    const auto full = triangle(1.0);
    const auto f = transition_weights(dataset_node("d1"), model_node("m1"), full, config(1, 4), WalkVariant::Node2VecPlus);
    CHECK(f.at(dataset_node("d2")) == 1.0);
  }

  TEST_CASE("negative edges are not walked; dead ends return no weights") {
    const ZooGraph g({dataset_node("d1"), model_node("m1"), model_node("m2")},
                     {md("d1", "m1", 1.0), md("d1", "m2", 0.1, EdgeLabel::Negative)});
    const auto w = transition_weights(model_node("m1"), dataset_node("d1"), g, config(1, 1), WalkVariant::Node2Vec);
    CHECK(w.size() == 1);
    CHECK(transition_weights(dataset_node("d1"), model_node("m2"), g, config(1, 1), WalkVariant::Node2Vec).empty());
  }

  TEST_CASE("two-node graph alternates") {
    const ZooGraph g({dataset_node("d1"), model_node("m1")}, {md("d1", "m1", 0.8)});
    auto c = config(1, 1);
    c.walk_length = 3;
    c.walks_per_node = 4;
    const auto walks = sample_walks(g, c);
    CHECK(walks.walks.size() == 8);
    for (const auto& w : walks.walks) {
      REQUIRE(w.size() == 3);
      CHECK(w[0] != w[1]);
      CHECK(w[0] == w[2]);
    }
  }

  TEST_CASE("walks follow positive edges and are deterministic") {
    auto rng = make_rng(5);
    std::vector<NodeRef> nodes;
    std::vector<ZooEdge> edges;
    for (int j = 0; j < 4; ++j) nodes.push_back(dataset_node("d" + std::to_string(j)));
    for (int i = 0; i < 6; ++i) nodes.push_back(model_node("m" + std::to_string(i)));
    for (int j = 0; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        for (auto& e : dd("d" + std::to_string(j), "d" + std::to_string(k), 2 * uniform01(rng) - 1)) edges.push_back(e);
      }
      for (int i = 0; i < 6; ++i) {
        const double w = uniform01(rng);
        edges.push_back(md("d" + std::to_string(j), "m" + std::to_string(i), w,
                           w >= 0.5 ? EdgeLabel::Positive : EdgeLabel::Negative));
      }
    }
    const ZooGraph g(nodes, edges);
    std::set<std::pair<std::size_t, std::size_t>> positive;
    for (const auto& e : g.edges()) {
      if (e.label != EdgeLabel::Positive) continue;
      positive.emplace(*g.index_of(e.a), *g.index_of(e.b));
      positive.emplace(*g.index_of(e.b), *g.index_of(e.a));
    }
    auto c = config(0.5, 2.0);
    c.walk_length = 20;
    c.threads = 3;
    const auto a = sample_walks(g, c);
    for (const auto& w : a.walks) {
      CHECK(w.size() <= 20);
      for (std::size_t k = 1; k < w.size(); ++k) CHECK(positive.count({w[k - 1], w[k]}) == 1);
    }
    c.threads = 1;
    CHECK(sample_walks(g, c).walks == a.walks);
    c.seed = 43;
    CHECK(sample_walks(g, c).walks != a.walks);
  }

  TEST_CASE("graph without positive edges") {
    const ZooGraph g({dataset_node("d1"), model_node("m1")}, {md("d1", "m1", 0.1, EdgeLabel::Negative)});
    try {
      sample_walks(g, WalkConfig{});
      FAIL("expected EmptyGraph");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EmptyGraph);
    }
  }

  TEST_CASE("config validation") {
    auto c = config(0, 1);
    CHECK_THROWS_AS(validate(c), Error);
    c = config(1, 1);
    c.dim = 0;
    CHECK_THROWS_AS(validate(c), Error);
  }
}
