#include "zgs/transferability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <tuple>

#include "zgs/csv.hpp"
#include "zgs/error.hpp"
#include "zgs/parallel.hpp"

namespace fs = std::filesystem;

namespace zgs {

EvidenceSolver::EvidenceSolver(Eigen::MatrixXd features) : r_(std::move(features)) {
  if (r_.rows() == 0 || r_.cols() == 0) raise(ErrorKind::EmptyInput, "empty feature matrix");
  if (!r_.allFinite()) raise(ErrorKind::NumericalError, "feature matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r_.transpose() * r_);
  if (eig.info() != Eigen::Success) raise(ErrorKind::NumericalError, "eigendecomposition of R^T R failed");
  eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
  eigenvectors_ = eig.eigenvectors();
}

EvidenceSolver::Fit EvidenceSolver::fit(const Eigen::VectorXd& y, const Eigen::VectorXd& rty, double alpha,
                                        double beta) const {
  const double n = static_cast<double>(r_.rows());
  const double d = static_cast<double>(r_.cols());
  const Eigen::ArrayXd denom = alpha + beta * eigenvalues_.array();
  const Eigen::VectorXd z = eigenvectors_.transpose() * rty;

  Fit f;
  f.m = beta * (eigenvectors_ * (z.array() / denom).matrix());
  f.gamma = (beta * eigenvalues_.array() / denom).sum();
  f.residual_sq = (y - r_ * f.m).squaredNorm();
  const double log_det_a = denom.log().sum();
  f.log_evidence = 0.5 * d * std::log(alpha) + 0.5 * n * std::log(beta) - 0.5 * n * std::log(2.0 * std::numbers::pi) -
                   0.5 * log_det_a - 0.5 * beta * f.residual_sq - 0.5 * alpha * f.m.squaredNorm();
  return f;
}

EvidenceValue EvidenceSolver::evaluate(const Eigen::VectorXd& y, double alpha, double beta) const {
  if (y.size() != r_.rows()) raise(ErrorKind::ShapeError, "label vector length does not match feature rows");
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    raise(ErrorKind::NumericalError, "alpha and beta must be positive and finite");
  }
  if (!y.allFinite()) raise(ErrorKind::NumericalError, "labels contain non-finite values");
  auto f = fit(y, r_.transpose() * y, alpha, beta);
  return {f.log_evidence, std::move(f.m)};
}

EvidenceState EvidenceSolver::maximize(const Eigen::VectorXd& y, const EvidenceOptions& options) const {
  const auto n = r_.rows();
  if (y.size() != n) raise(ErrorKind::ShapeError, "label vector length does not match feature rows");
  if (n < 2) raise(ErrorKind::InsufficientData, "evidence maximization needs at least two samples");
  if (!y.allFinite()) raise(ErrorKind::NumericalError, "labels contain non-finite values");
  if ((y.array() == y(0)).all()) raise(ErrorKind::DegenerateLabels, "label vector is constant");

  const Eigen::VectorXd rty = r_.transpose() * y;
  EvidenceState state;
  state.num_samples = static_cast<std::size_t>(n);
  Fit f = fit(y, rty, state.alpha, state.beta);
  state.trace.push_back(f.log_evidence);
  state.beta_trace.push_back(state.beta);

  for (int it = 0; it < options.max_iterations; ++it) {
    const double m_sq = f.m.squaredNorm();
    double alpha = m_sq > 0.0 ? f.gamma / m_sq : options.alpha_when_mean_zero;
    double beta = f.residual_sq > 0.0 ? (static_cast<double>(n) - f.gamma) / f.residual_sq : options.precision_cap;
    alpha = std::clamp(alpha, 1.0 / options.precision_cap, options.precision_cap);
    beta = std::clamp(beta, 1.0 / options.precision_cap, options.precision_cap);

    Fit next = fit(y, rty, alpha, beta);
    if (!std::isfinite(next.log_evidence)) raise(ErrorKind::NumericalError, "log-evidence diverged");
    const double delta = next.log_evidence - f.log_evidence;
    state.alpha = alpha;
    state.beta = beta;
    state.iterations = it + 1;
    state.trace.push_back(next.log_evidence);
    state.beta_trace.push_back(beta);
    f = std::move(next);
    if (std::abs(delta) < options.tolerance) break;
  }
  state.m = std::move(f.m);
  state.log_evidence = f.log_evidence;
  return state;
}

EvidenceValue log_evidence(const Eigen::MatrixXd& features, const Eigen::VectorXd& y, double alpha, double beta) {
  return EvidenceSolver(features).evaluate(y, alpha, beta);
}

EvidenceState maximize_evidence(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                                const EvidenceOptions& options) {
  return EvidenceSolver(features).maximize(y, options);
}

double logme_score(const Eigen::MatrixXd& features, std::span<const int> labels, int num_classes,
                   const EvidenceOptions& options) {
  if (num_classes < 2) raise(ErrorKind::DegenerateLabels, "need at least two classes");
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    raise(ErrorKind::ShapeError, "label count does not match feature rows");
  }
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int l : labels) {
    if (l < 0 || l >= num_classes) raise(ErrorKind::DegenerateLabels, "label " + std::to_string(l) + " out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      raise(ErrorKind::DegenerateLabels, "class " + std::to_string(c) + " has no samples");
    }
  }

  const EvidenceSolver solver(features);
  double total = 0.0;
  Eigen::VectorXd y(features.rows());
  for (int c = 0; c < num_classes; ++c) {
    for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i] == c ? 1.0 : 0.0;
    total += solver.maximize(y, options).normalized();
  }
  return total / num_classes;
}

TransferRecord logme_record(const ModelFeatureSet& set, int num_classes, const EvidenceOptions& options) {
  return {set.model_id, set.dataset_id, TransferMethod::LogME,
          logme_score(set.features, set.labels, num_classes, options)};
}

std::vector<ModelFeatureSet> load_model_features(const fs::path& root) {
  std::vector<ModelFeatureSet> out;
  const fs::path dir = root / "model_features";
  if (!fs::is_directory(dir)) return out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    auto t = csv::read(file);
    const auto c_label = t.column("label");
    ModelFeatureSet set;
    set.model_id = file.parent_path().filename().string();
    set.dataset_id = file.stem().string();
    const auto d = static_cast<Eigen::Index>(t.header.size() - 1);
    if (d < 1) raise(ErrorKind::ParseError, file.string() + ": no feature columns");
    set.features.resize(static_cast<Eigen::Index>(t.rows.size()), d);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      Eigen::Index col = 0;
      for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (c == c_label) {
          set.labels.push_back(static_cast<int>(csv::parse_int(t.rows[r][c], file, t.line_numbers[r])));
        } else {
          set.features(static_cast<Eigen::Index>(r), col++) = csv::parse_real(t.rows[r][c], file, t.line_numbers[r]);
        }
      }
    }
    out.push_back(std::move(set));
  }
  return out;
}

void write_model_features(const ModelFeatureSet& set, const fs::path& root) {
  const fs::path dir = root / "model_features" / set.model_id;
  fs::create_directories(dir);
  std::ofstream out(dir / (set.dataset_id + ".csv"), std::ios::binary);
  if (!out) raise(ErrorKind::MissingInput, "cannot write " + (dir / (set.dataset_id + ".csv")).string());
  std::vector<std::string> cells{"label"};
  for (Eigen::Index c = 0; c < set.features.cols(); ++c) cells.push_back("f" + std::to_string(c));
  csv::write_row(out, cells);
  for (Eigen::Index r = 0; r < set.features.rows(); ++r) {
    cells.assign(1, std::to_string(set.labels[static_cast<std::size_t>(r)]));
    for (Eigen::Index c = 0; c < set.features.cols(); ++c) cells.push_back(csv::format_real(set.features(r, c)));
    csv::write_row(out, cells);
  }
}

std::vector<TransferRecord> score_all(const Zoo& zoo, const std::vector<ModelFeatureSet>& sets, unsigned threads) {
  for (const auto& s : sets) {
    if (!zoo.model_index(s.model_id)) raise(ErrorKind::IntegrityError, "model features for unknown model '" + s.model_id + "'");
    if (!zoo.dataset_index(s.dataset_id)) {
      raise(ErrorKind::IntegrityError, "model features for unknown dataset '" + s.dataset_id + "'");
    }
  }
  std::vector<TransferRecord> out(sets.size());
  parallel_for(sets.size(), threads, [&](std::size_t i) {
    const auto& s = sets[i];
    out[i] = logme_record(s, static_cast<int>(zoo.find_dataset(s.dataset_id)->num_classes));
  });
  return out;
}

std::vector<TransferRecord> merge_transfer_scores(std::vector<TransferRecord> existing,
                                                  const std::vector<TransferRecord>& updates) {
  for (const auto& u : updates) {
    auto it = std::find_if(existing.begin(), existing.end(), [&](const TransferRecord& r) {
      return r.model_id == u.model_id && r.dataset_id == u.dataset_id && r.method == u.method;
    });
    if (it != existing.end()) {
      *it = u;
    } else {
      existing.push_back(u);
    }
  }
  return existing;
}

}  // namespace zgs
