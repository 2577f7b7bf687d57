#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "zgs/error.hpp"
#include "zgs/synthzoo.hpp"

using namespace zgs;

TEST_SUITE("synthzoo") {
  TEST_CASE("default zoo shape and validity") {
    const auto s = generate(SynthConfig{});
    const auto& zoo = s.zoo;
    CHECK(zoo.models().size() == 40);
    CHECK(zoo.datasets().size() == 12);
    CHECK(validate_zoo(zoo).clean());
    std::size_t finetune = 0, pretrain = 0;
    for (const auto& h : zoo.history()) (h.kind == RecordKind::Finetune ? finetune : pretrain)++;
    CHECK(finetune == static_cast<std::size_t>(std::floor(0.7 * 40 * 12)));
    CHECK(pretrain == 40);
    CHECK(zoo.features().size() == 12);
    for (const auto& [id, f] : zoo.features()) {
      CHECK(f.rows.rows() == 8);
      CHECK(f.rows.cols() == 16);
    }
    CHECK(zoo.transfer_scores().size() == 40 * 12);
    CHECK(s.truth.U.rows() == 40);
    CHECK(s.truth.V.cols() == 4);
  }

  TEST_CASE("accuracies follow the latent model") {
    const auto s = generate(SynthConfig{});
    const auto& t = s.truth;
    const Eigen::MatrixXd logit =
        (t.U * t.V.transpose()).colwise() + t.model_bias;
    const Eigen::MatrixXd full = logit.rowwise() + t.dataset_bias.transpose();
    CHECK((full - t.logit).cwiseAbs().maxCoeff() < 1e-12);
    for (const auto& h : s.zoo.history()) {
      if (h.kind != RecordKind::Finetune) continue;
      const auto i = *s.zoo.model_index(h.model_id), j = *s.zoo.dataset_index(h.dataset_id);
      CHECK(h.accuracy == t.accuracy(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      const double implied = std::log(h.accuracy / (1 - h.accuracy));
      CHECK(std::abs(implied - t.logit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) < 0.5);
    }
  }

  TEST_CASE("determinism and seed sensitivity") {
    SynthConfig c;
    c.n_models = 10;
    c.n_datasets = 4;
    const auto a = generate(c), b = generate(c);
    CHECK(a.zoo.data() == b.zoo.data());
    c.seed = 7;
    CHECK(!(generate(c).zoo.data() == a.zoo.data()));
  }

  TEST_CASE("writes a loadable registry with truth") {
    SynthConfig c;
    c.n_models = 6;
    c.n_datasets = 3;
    const auto s = generate(c);
    test::TempDir dir;
    write_synth_zoo(s, dir.path());
    const auto back = load_zoo(dir.path());
    CHECK(back.models().size() == 6);
    CHECK(back.history() == s.zoo.history());
    const auto truth = test::read_text(dir / "truth.csv");
    CHECK(truth.rfind("model_id,dataset_id,true_logit\n", 0) == 0);
    CHECK(std::count(truth.begin(), truth.end(), '\n') == 1 + 6 * 3);
  }

  TEST_CASE("invalid configs") {
    SynthConfig c;
    c.n_datasets = 2;
    CHECK_THROWS_AS(generate(c), Error);
    c = SynthConfig{};
    c.observed_fraction = 0;
    CHECK_THROWS_AS(generate(c), Error);
    c = SynthConfig{};
    c.feature_dim = 3;
    CHECK_THROWS_AS(generate(c), Error);
  }
}
