#pragma once

#include <atomic>
#include <cmath>
#include <iterator>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include <Eigen/Dense>

#include "zgs/registry.hpp"
#include "zgs/rng.hpp"

namespace zgs::test {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("zgs-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double normal(std::mt19937_64& rng) {
  double u1 = 0.0;
  while (u1 == 0.0) u1 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * uniform01(rng));
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) { return random_matrix(rng, n, 1).col(0); }

/// Two models, two datasets, four fine-tune records.
inline ZooData tiny_zoo_data() {
  ZooData z;
  z.models = {{"m1", "resnet", std::string("d1"), 224, 25'000'000, 98.0, 0.76},
              {"m2", "vit", std::nullopt, 384, 86'000'000, 330.0, std::nullopt}};
  z.datasets = {{"d1", 5000, 10, Modality::Image}, {"d2", 1200, 4, Modality::Image}};
  z.history = {{"m1", "d1", 0.8, RecordKind::Finetune},
               {"m1", "d2", 0.6, RecordKind::Finetune},
               {"m2", "d1", 0.7, RecordKind::Finetune},
               {"m2", "d2", 0.9, RecordKind::Finetune}};
  SampleFeatureMatrix f1{"d1", Eigen::MatrixXd(2, 3)};
  f1.rows << 1, 2, 3, 0.5, -1, 2;
  SampleFeatureMatrix f2{"d2", Eigen::MatrixXd(1, 3)};
  f2.rows << 3, 1, -2;
  z.features.emplace("d1", f1);
  z.features.emplace("d2", f2);
  z.transfer_scores = {{"m1", "d2", TransferMethod::Ingested, 1.5}, {"m2", "d2", TransferMethod::Ingested, -0.5}};
  return z;
}

}  // namespace zgs::test
