#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "zgs/error.hpp"
#include "zgs/features.hpp"

using namespace zgs;

namespace {

std::vector<ModelDatasetPair> all_pairs() { return {{"m1", "d1"}, {"m1", "d2"}, {"m2", "d1"}, {"m2", "d2"}}; }

SimilarityMatrix tiny_phi() {
  Eigen::MatrixXd phi(2, 2);
  phi << 1.0, 0.3, 0.3, 1.0;
  return {{"d1", "d2"}, phi};
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("metadata block") {
    const Zoo zoo(test::tiny_zoo_data());
    const auto rows = assemble_features(zoo, nullptr, nullptr, all_pairs(), {true, false, false, false});
    REQUIRE(rows.size() == 4);
    const auto& r = rows[1];
    CHECK(r.model_id == "m1");
    CHECK(r.dataset_id == "d2");
    REQUIRE(r.x.size() == 9);
    CHECK(r.x(0) == doctest::Approx(std::log10(1200.0)));
    CHECK(r.x(1) == 4);
    CHECK(r.x(2) == 224);
    CHECK(r.x(3) == doctest::Approx(std::log10(25'000'001.0)));
    CHECK(r.x(4) == 98);
    CHECK(r.x(5) == 0.76);
    CHECK(r.x(6) == 1);
    CHECK(r.x(7) == 0);
    CHECK(r.x(8) == 1);
    CHECK(r.y == 0.6);
    CHECK(rows[2].x(5) == 0.0);
    CHECK(rows[2].x(8) == 0.0);
  }

  TEST_CASE("similarity and transfer blocks") {
    const Zoo zoo(test::tiny_zoo_data());
    const auto phi = tiny_phi();
    const auto rows = assemble_features(zoo, &phi, nullptr, all_pairs(), {false, true, true, false});
    REQUIRE(rows[0].x.size() == 3);
    CHECK(rows[0].x(0) == 1.0);
    CHECK(rows[1].x(0) == 0.3);
    CHECK(rows[2].x(0) == 0.0);  // no pretrained dataset
    CHECK(rows[0].x(2) == 0.0);
    CHECK(rows[1].x(1) == 1.0);
    CHECK(rows[1].x(2) == 1.0);
    CHECK(rows[3].x(1) == 0.0);
    CHECK(rows[3].x(2) == 1.0);
  }

  TEST_CASE("graph block concatenates model then dataset vectors") {
    const Zoo zoo(test::tiny_zoo_data());
    EmbeddingTable table(2);
    table.set(model_node("m1"), Eigen::Vector2d(1, 2));
    table.set(model_node("m2"), Eigen::Vector2d(3, 4));
    table.set(dataset_node("d1"), Eigen::Vector2d(5, 6));
    const auto row = assemble_features(zoo, nullptr, &table, {{"m2", "d1"}}, {false, false, false, true})[0];
    CHECK(row.x == (Eigen::VectorXd(4) << 3, 4, 5, 6).finished());
    FeatureAssembler a(zoo, nullptr, &table, {false, false, false, true});
    try {
      a.assemble(ModelDatasetPair{"m1", "d2"});
      FAIL("expected MissingEmbedding");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingEmbedding);
    }
    CHECK_THROWS_AS(FeatureAssembler(zoo, nullptr, nullptr, {false, false, false, true}), Error);
  }

  TEST_CASE("vocabulary is frozen by training pairs") {
    const Zoo zoo(test::tiny_zoo_data());
    FeatureAssembler a(zoo, nullptr, nullptr, {true, false, false, false});
    a.fit_vocabulary({{"m2", "d1"}});
    CHECK(a.width() == 7);
    const auto row = a.assemble(ModelDatasetPair{"m1", "d1"});
    CHECK(row.x(6) == 0.0);  // resnet unseen
    const auto names = a.column_names();
    CHECK(names.back() == "arch=vit");
  }

  TEST_CASE("errors") {
    const Zoo zoo(test::tiny_zoo_data());
    CHECK_THROWS_AS(FeatureAssembler(zoo, nullptr, nullptr, {false, false, false, false}), Error);
    FeatureAssembler a(zoo, nullptr, nullptr, {true, false, false, false});
    CHECK_THROWS_AS(a.assemble(ModelDatasetPair{"m9", "d1"}), Error);
    CHECK_THROWS_AS(a.assemble(ModelDatasetPair{"m1", "d9"}), Error);
  }

  TEST_CASE("csv dump") {
    const Zoo zoo(test::tiny_zoo_data());
    FeatureAssembler a(zoo, nullptr, nullptr, {false, false, true, false});
    const auto rows = a.assemble(all_pairs());
    test::TempDir dir;
    write_features_csv(rows, a.column_names(), dir / "f.csv");
    const auto text = test::read_text(dir / "f.csv");
    CHECK(text.rfind("model_id,dataset_id,transfer_score,transfer_present,y\n", 0) == 0);
    CHECK(text.find("m1,d2,1,1,0.59999999999999998\n") != std::string::npos);
  }
}
