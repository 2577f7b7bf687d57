#pragma once

#include <filesystem>
#include <map>

#include <Eigen/Dense>

#include "zgs/zoograph.hpp"

namespace zgs {

/// One learned vector per graph node, all of the same dimension.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(int dim) : dim_(dim) {}

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  const std::map<NodeRef, Eigen::VectorXd>& vectors() const noexcept { return vectors_; }

  void set(const NodeRef& node, Eigen::VectorXd v);
  const Eigen::VectorXd* find(const NodeRef& node) const;

  /// `kind,id,v0..v{dim-1}` with 17 significant digits.
  void write_csv(const std::filesystem::path& file) const;
  static EmbeddingTable read_csv(const std::filesystem::path& file);

 private:
  int dim_ = 0;
  std::map<NodeRef, Eigen::VectorXd> vectors_;
};

}  // namespace zgs
