#include <set>
#include <tuple>

#include "doctest.h"
#include "support.hpp"
#include "zgs/error.hpp"
#include "zgs/zoograph.hpp"

using namespace zgs;

namespace {

using EdgeKey = std::tuple<std::string, std::string, EdgeKind>;

std::set<EdgeKey> edge_keys(const ZooGraph& g) {
  std::set<EdgeKey> out;
  for (const auto& e : g.edges()) out.emplace(e.a.id, e.b.id, e.kind);
  return out;
}

ZooData example_zoo() {
  ZooData z;
  z.models = {{"m1", "resnet", std::nullopt, 224, 1000, 1.0, std::nullopt},
              {"m2", "vit", std::nullopt, 224, 2000, 2.0, std::nullopt}};
  z.datasets = {{"d1", 100, 2, Modality::Image}, {"d2", 100, 2, Modality::Image}};
  z.history = {{"m1", "d2", 0.9, RecordKind::Finetune},
               {"m2", "d1", 0.8, RecordKind::Finetune},
               {"m2", "d2", 0.7, RecordKind::Finetune}};
  return z;
}

SimilarityMatrix phi_for(const std::vector<std::string>& ids, double off) {
  const auto k = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(k, k, off);
  phi.diagonal().setOnes();
  return {ids, phi};
}

ZooData wide_zoo(int k) {
  ZooData z;
  for (int j = 0; j < k; ++j) z.datasets.push_back({"d" + std::to_string(j), 100, 2, Modality::Image});
  z.models = {{"m0", "a", std::nullopt, 1, 1, 1.0, std::nullopt}};
  return z;
}

}  // namespace

TEST_SUITE("zoograph") {
  TEST_CASE("min-max accuracy normalization") {
    auto norm = [](std::vector<double> acc) {
      std::vector<TrainingRecord> r;
      for (std::size_t i = 0; i < acc.size(); ++i) r.push_back({"m" + std::to_string(i), "d", acc[i]});
      return normalize_accuracy(r);
    };
    auto a = norm({0.2, 0.6, 1.0});
    CHECK(a["m0"] == 0.0);
    CHECK(a["m1"] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a["m2"] == 1.0);
    CHECK(norm({0.7})["m0"] == 1.0);
    auto b = norm({0.3, 0.4, 0.8, 0.9});
    CHECK(std::abs(b["m1"] - 1.0 / 6.0) < 1e-12);
    CHECK(std::abs(b["m2"] - 5.0 / 6.0) < 1e-12);
    CHECK(b["m3"] == 1.0);
  }

  TEST_CASE("worked two-dataset example") {
    const Zoo zoo(example_zoo());
    const auto g = build_graph(zoo, phi_for({"d1", "d2"}, 0.3));
    const std::set<EdgeKey> expected = {{"d1", "d2", EdgeKind::DatasetSimilarity},
                                        {"d2", "d1", EdgeKind::DatasetSimilarity},
                                        {"d1", "m2", EdgeKind::Performance},
                                        {"d2", "m2", EdgeKind::Performance},
                                        {"d2", "m1", EdgeKind::Performance}};
    CHECK(edge_keys(g) == expected);
    CHECK(g.nodes().size() == 4);
    for (const auto& e : g.edges()) {
      if (e.b.id == "m2" && e.a.id == "d2") CHECK(e.label == EdgeLabel::Negative);  // 0.7 is the d2 minimum
      if (e.b.id == "m1") CHECK(e.label == EdgeLabel::Positive);
    }
  }

  TEST_CASE("target removal on the worked example") {
    const Zoo zoo(example_zoo());
    const auto g = build_graph(zoo, phi_for({"d1", "d2"}, 0.3));
    const auto before = g.edges();
    const auto r = remove_target_edges(g, "d2");
    const std::set<EdgeKey> expected = {{"d1", "d2", EdgeKind::DatasetSimilarity},
                                        {"d2", "d1", EdgeKind::DatasetSimilarity},
                                        {"d1", "m2", EdgeKind::Performance}};
    CHECK(edge_keys(r) == expected);
    CHECK(g.edges() == before);
    CHECK(r.count(EdgeKind::DatasetSimilarity) == g.count(EdgeKind::DatasetSimilarity));
    CHECK_THROWS_AS(remove_target_edges(g, "d9"), Error);
  }

  TEST_CASE("removing a target without model edges changes nothing") {
    auto data = example_zoo();
    data.datasets.push_back({"d3", 100, 2, Modality::Image});
    const auto g = build_graph(Zoo(data), phi_for({"d1", "d2", "d3"}, 0.1));
    CHECK(remove_target_edges(g, "d3").edges() == g.edges());
  }

  TEST_CASE("73 fully connected datasets give 5256 directed similarity edges") {
    const Zoo zoo(wide_zoo(73));
    std::vector<std::string> ids;
    for (const auto& d : zoo.datasets()) ids.push_back(d.dataset_id);
    const auto g = build_graph(zoo, phi_for(ids, -0.2));
    CHECK(g.count(EdgeKind::DatasetSimilarity) == 5256);
    GraphConfig sparse;
    sparse.dd_fully_connected = false;
    CHECK(build_graph(zoo, phi_for(ids, -0.2), sparse).count(EdgeKind::DatasetSimilarity) == 0);
    CHECK(build_graph(zoo, phi_for(ids, 0.2), sparse).count(EdgeKind::DatasetSimilarity) == 5256);
  }

  TEST_CASE("transfer edges below the threshold are absent") {
    auto data = example_zoo();
    data.models.push_back({"m3", "vit", std::nullopt, 1, 1, 1.0, std::nullopt});
    // min-max on d1: 0 -> 0, 4 -> 0.4, 10 -> 1
    data.transfer_scores = {{"m1", "d1", TransferMethod::Ingested, 0.0},
                            {"m2", "d1", TransferMethod::Ingested, 4.0},
                            {"m3", "d1", TransferMethod::Ingested, 10.0}};
    const auto g = build_graph(Zoo(data), phi_for({"d1", "d2"}, 0.3));
    std::set<std::string> transfer_models;
    for (const auto& e : g.edges()) {
      if (e.kind == EdgeKind::Transfer) {
        transfer_models.insert(e.b.id);
        CHECK(e.label == EdgeLabel::Positive);
        CHECK(e.weight >= 0.5);
      }
    }
    CHECK(transfer_models == std::set<std::string>{"m3"});
  }

  TEST_CASE("logme scores win over ingested ones") {
    auto data = example_zoo();
    data.transfer_scores = {{"m1", "d1", TransferMethod::Ingested, 10.0},
                            {"m2", "d1", TransferMethod::Ingested, 0.0},
                            {"m1", "d1", TransferMethod::LogME, -5.0},
                            {"m2", "d1", TransferMethod::LogME, -1.0}};
    const auto t = normalized_transfer_scores(Zoo(data));
    CHECK(t.at({"m1", "d1"}) == 0.0);
    CHECK(t.at({"m2", "d1"}) == 1.0);
  }

  TEST_CASE("fine-tune records override pretrain records for the same pair") {
    auto data = example_zoo();
    data.history.push_back({"m1", "d1", 0.1, RecordKind::Pretrain});
    data.history.push_back({"m2", "d1", 0.95, RecordKind::Pretrain});
    const auto g = build_graph(Zoo(data), phi_for({"d1", "d2"}, 0.3));
    int d1_m2 = 0;
    for (const auto& e : g.edges()) {
      if (e.a.id == "d1" && e.b.id == "m2") ++d1_m2;
    }
    CHECK(d1_m2 == 1);
  }

  TEST_CASE("edge weights and labels follow the thresholds") {
    auto rng = make_rng(31);
    ZooData data;
    for (int j = 0; j < 6; ++j) data.datasets.push_back({"d" + std::to_string(j), 100, 2, Modality::Image});
    for (int i = 0; i < 10; ++i) {
      data.models.push_back({"m" + std::to_string(i), "a", std::nullopt, 1, 1, 1.0, std::nullopt});
      for (int j = 0; j < 6; ++j) {
        if (uniform01(rng) < 0.7) {
          data.history.push_back({"m" + std::to_string(i), "d" + std::to_string(j), uniform01(rng)});
        }
        data.transfer_scores.push_back({"m" + std::to_string(i), "d" + std::to_string(j), TransferMethod::Ingested,
                                        test::normal(rng)});
      }
    }
    const Zoo zoo(data);
    std::vector<DatasetEmbedding> emb;
    for (const auto& d : zoo.datasets()) emb.push_back({d.dataset_id, test::random_vector(rng, 5)});
    const auto phi = similarity_matrix(emb);
    const GraphConfig cfg;
    const auto g = build_graph(zoo, phi, cfg);
    for (const auto& e : g.edges()) {
      if (e.kind == EdgeKind::DatasetSimilarity) {
        CHECK(e.weight >= -1.0);
        CHECK(e.weight <= 1.0);
        CHECK(e.a.kind == NodeKind::Dataset);
        CHECK(e.b.kind == NodeKind::Dataset);
      } else {
        CHECK(e.weight >= 0.0);
        CHECK(e.weight <= 1.0);
        CHECK(e.a.kind == NodeKind::Dataset);
        CHECK(e.b.kind == NodeKind::Model);
      }
      if (e.kind == EdgeKind::Performance) {
        CHECK((e.label == EdgeLabel::Positive) == (e.weight >= cfg.accuracy_prune_threshold));
      }
      if (e.kind == EdgeKind::Transfer) CHECK(e.weight >= cfg.transfer_prune_threshold);
    }
    CHECK(build_graph(zoo, phi, cfg).edges() == g.edges());

    for (const auto& d : zoo.datasets()) {
      const auto r = remove_target_edges(g, d.dataset_id);
      std::size_t incident = 0;
      for (const auto& e : g.edges()) incident += e.kind != EdgeKind::DatasetSimilarity && e.a.id == d.dataset_id;
      CHECK(r.edges().size() == g.edges().size() - incident);
      CHECK(r.count(EdgeKind::DatasetSimilarity) == g.count(EdgeKind::DatasetSimilarity));
    }
  }

  TEST_CASE("dataset with history but no similarity row") {
    const Zoo zoo(example_zoo());
    try {
      build_graph(zoo, phi_for({"d1"}, 0.0));
      FAIL("expected IntegrityError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IntegrityError);
      CHECK(std::string(e.what()).find("d2") != std::string::npos);
    }
  }

  TEST_CASE("graph validation") {
    const std::vector<NodeRef> nodes = {dataset_node("d1"), model_node("m1")};
    CHECK_THROWS_AS(ZooGraph(nodes, {{dataset_node("d1"), dataset_node("d1"), EdgeKind::DatasetSimilarity, 1.0}}), Error);
    CHECK_THROWS_AS(ZooGraph(nodes, {{dataset_node("d1"), model_node("m9"), EdgeKind::Performance, 1.0}}), Error);
    CHECK_THROWS_AS(ZooGraph(nodes, {{dataset_node("d1"), model_node("m1"), EdgeKind::DatasetSimilarity, 1.0}}), Error);
    CHECK_THROWS_AS(ZooGraph({dataset_node("d1"), dataset_node("d1")}, {}), Error);
  }

  TEST_CASE("graph dump") {
    const auto g = build_graph(Zoo(example_zoo()), phi_for({"d1", "d2"}, 0.3));
    test::TempDir dir;
    write_graph_csv(g, dir / "graph.csv");
    const auto text = test::read_text(dir / "graph.csv");
    CHECK(text.rfind("a_kind,a_id,b_kind,b_id,edge_kind,weight,label\n", 0) == 0);
    CHECK(text.find("dataset,d2,model,m2,md_performance,0,negative") != std::string::npos);
  }
}
