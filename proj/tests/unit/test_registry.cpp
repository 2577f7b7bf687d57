#include <functional>

#include "doctest.h"
#include "support.hpp"
#include "zgs/error.hpp"
#include "zgs/registry.hpp"

using namespace zgs;
using zgs::test::TempDir;
using zgs::test::write_text;

namespace {

void write_fixture(const TempDir& dir) {
  write_text(dir / "models.csv",
             "model_id,architecture,pretrained_dataset_id,input_shape,num_params,memory_mb,pretrained_accuracy\n"
             "m1,resnet,d1,224,25000000,98.5,0.76\n"
             "m2,vit,,384,86000000,330,\n");
  write_text(dir / "datasets.csv", "dataset_id,num_samples,num_classes,modality\nd1,5000,10,image\nd2,1200,4,text\n");
  write_text(dir / "history.csv",
             "model_id,dataset_id,accuracy,kind\nm1,d1,0.8,finetune\nm1,d2,0.6,finetune\nm2,d1,0.7,pretrain\n"
             "m2,d2,0.9,finetune\n");
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_SUITE("registry") {
  TEST_CASE("fixture directory loads with the expected counts") {
    TempDir dir;
    write_fixture(dir);
    const auto zoo = load_zoo(dir.path());
    CHECK(zoo.models().size() == 2);
    CHECK(zoo.datasets().size() == 2);
    CHECK(zoo.history().size() == 4);
    const auto* m2 = zoo.find_model("m2");
    REQUIRE(m2);
    CHECK_FALSE(m2->pretrained_dataset_id.has_value());
    CHECK_FALSE(m2->pretrained_accuracy.has_value());
    CHECK(zoo.find_dataset("d2")->modality == Modality::Text);
    CHECK(zoo.finetune_accuracy("m1", "d2") == doctest::Approx(0.6));
    CHECK_FALSE(zoo.finetune_accuracy("m2", "d1").has_value());  // pretrain only
  }

  TEST_CASE("unknown model in history is an integrity error naming the row") {
    TempDir dir;
    write_fixture(dir);
    write_text(dir / "history.csv", "model_id,dataset_id,accuracy,kind\nm1,d1,0.8,finetune\nm9,d1,0.5,finetune\n");
    try {
      load_zoo(dir.path());
      FAIL("expected IntegrityError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IntegrityError);
      const std::string msg = e.what();
      CHECK(msg.find("m9") != std::string::npos);
      CHECK(msg.find("history.csv:3") != std::string::npos);
    }
  }

  TEST_CASE("missing required file") {
    TempDir dir;
    write_fixture(dir);
    std::filesystem::remove(dir / "models.csv");
    try {
      load_zoo(dir.path());
      FAIL("expected MissingInput");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingInput);
      CHECK(std::string(e.what()).find("models.csv") != std::string::npos);
    }
  }

  TEST_CASE("malformed number reports the line") {
    TempDir dir;
    write_fixture(dir);
    write_text(dir / "datasets.csv", "dataset_id,num_samples,num_classes,modality\nd1,5000,10,image\nd2,12x0,4,text\n");
    try {
      load_zoo(dir.path());
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
      CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
  }

  TEST_CASE("invariant violations surface through load") {
    TempDir dir;
    write_fixture(dir);
    write_text(dir / "history.csv", "model_id,dataset_id,accuracy,kind\nm1,d1,1.3,finetune\n");
    CHECK(kind_of([&] { load_zoo(dir.path()); }) == ErrorKind::IntegrityError);
  }

  TEST_CASE("validate_zoo reports each violation") {
    SUBCASE("clean") { CHECK(validate_zoo(Zoo(test::tiny_zoo_data())).clean()); }
    SUBCASE("accuracy out of range") {
      auto d = test::tiny_zoo_data();
      d.history[0].accuracy = 1.3;
      const auto report = validate_zoo(Zoo(d));
      REQUIRE(report.violations.size() == 1);
      CHECK(report.violations[0].find("accuracy out of [0,1]") != std::string::npos);
    }
    SUBCASE("duplicate fine-tune record") {
      auto d = test::tiny_zoo_data();
      d.history.push_back(d.history[1]);
      CHECK(validate_zoo(Zoo(d)).violations.size() == 1);
    }
    SUBCASE("pretrain and finetune on the same pair are distinct records") {
      auto d = test::tiny_zoo_data();
      d.history.push_back({"m1", "d1", 0.9, RecordKind::Pretrain});
      CHECK(validate_zoo(Zoo(d)).clean());
    }
    SUBCASE("num_samples below num_classes") {
      auto d = test::tiny_zoo_data();
      d.datasets[1].num_samples = 3;
      CHECK(validate_zoo(Zoo(d)).violations.size() == 1);
    }
    SUBCASE("dangling ids") {
      auto d = test::tiny_zoo_data();
      d.transfer_scores.push_back({"m7", "d1", TransferMethod::Ingested, 0.1});
      CHECK(validate_zoo(Zoo(d)).violations.size() == 1);
    }
    SUBCASE("non-finite feature") {
      auto d = test::tiny_zoo_data();
      d.features.at("d1").rows(0, 0) = std::nan("");
      CHECK(validate_zoo(Zoo(d)).violations.size() == 1);
    }
  }

  TEST_CASE("save then load is the identity on zoo contents") {
    auto rng = make_rng(7);
    auto data = test::tiny_zoo_data();
    for (auto& r : data.history) r.accuracy = uniform01(rng);
    data.models[0].memory_mb = 1.0 / 3.0;
    data.features.at("d1").rows = test::random_matrix(rng, 4, 3);
    data.transfer_scores.push_back({"m1", "d2", TransferMethod::LogME, -0.123456789012345678});
    TempDir dir;
    save_zoo(Zoo(data), dir.path());
    const auto loaded = load_zoo(dir.path());
    CHECK(loaded.data() == data);
    CHECK(validate_zoo(loaded).clean());
  }

  TEST_CASE("quoted cells round-trip") {
    auto data = test::tiny_zoo_data();
    data.models[1].architecture = "vit,\"large\"";
    TempDir dir;
    save_zoo(Zoo(data), dir.path());
    CHECK(load_zoo(dir.path()).data() == data);
  }
}
