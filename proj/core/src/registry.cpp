#include "zgs/registry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include "zgs/csv.hpp"
#include "zgs/error.hpp"

namespace fs = std::filesystem;

namespace zgs {

std::string_view to_string(Modality m) { return m == Modality::Image ? "image" : "text"; }
std::string_view to_string(RecordKind k) { return k == RecordKind::Pretrain ? "pretrain" : "finetune"; }
std::string_view to_string(TransferMethod m) { return m == TransferMethod::LogME ? "logme" : "ingested"; }

std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "image") return Modality::Image;
  if (s == "text") return Modality::Text;
  return std::nullopt;
}

std::optional<RecordKind> parse_record_kind(std::string_view s) {
  if (s == "pretrain") return RecordKind::Pretrain;
  if (s == "finetune") return RecordKind::Finetune;
  return std::nullopt;
}

std::optional<TransferMethod> parse_transfer_method(std::string_view s) {
  if (s == "logme") return TransferMethod::LogME;
  if (s == "ingested") return TransferMethod::Ingested;
  return std::nullopt;
}

Zoo::Zoo(ZooData data) : data_(std::move(data)) {
  for (std::size_t i = 0; i < data_.models.size(); ++i) model_index_.emplace(data_.models[i].model_id, i);
  for (std::size_t i = 0; i < data_.datasets.size(); ++i) dataset_index_.emplace(data_.datasets[i].dataset_id, i);
  for (const auto& r : data_.history) {
    if (r.kind == RecordKind::Finetune) finetune_.emplace(std::make_pair(r.model_id, r.dataset_id), r.accuracy);
  }
}

std::optional<std::size_t> Zoo::model_index(std::string_view id) const {
  auto it = model_index_.find(std::string(id));
  if (it == model_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Zoo::dataset_index(std::string_view id) const {
  auto it = dataset_index_.find(std::string(id));
  if (it == dataset_index_.end()) return std::nullopt;
  return it->second;
}

const ModelCard* Zoo::find_model(std::string_view id) const {
  auto i = model_index(id);
  return i ? &data_.models[*i] : nullptr;
}

const DatasetCard* Zoo::find_dataset(std::string_view id) const {
  auto i = dataset_index(id);
  return i ? &data_.datasets[*i] : nullptr;
}

std::optional<double> Zoo::finetune_accuracy(std::string_view model_id, std::string_view dataset_id) const {
  auto it = finetune_.find({std::string(model_id), std::string(dataset_id)});
  if (it == finetune_.end()) return std::nullopt;
  return it->second;
}

ValidationReport validate_zoo(const Zoo& zoo) {
  ValidationReport report;
  auto add = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  std::set<std::string> seen;
  for (const auto& m : zoo.models()) {
    if (!seen.insert(m.model_id).second) add("duplicate model_id '" + m.model_id + "'");
    if (m.model_id.empty()) add("empty model_id");
    if (m.num_params < 0) add("model '" + m.model_id + "': num_params negative");
    if (m.input_shape < 0) add("model '" + m.model_id + "': input_shape negative");
    if (!(m.memory_mb >= 0.0) || !std::isfinite(m.memory_mb)) add("model '" + m.model_id + "': memory_mb negative");
    if (m.pretrained_accuracy && !(*m.pretrained_accuracy >= 0.0 && *m.pretrained_accuracy <= 1.0)) {
      add("model '" + m.model_id + "': pretrained_accuracy out of [0,1]");
    }
  }

  seen.clear();
  for (const auto& d : zoo.datasets()) {
    if (!seen.insert(d.dataset_id).second) add("duplicate dataset_id '" + d.dataset_id + "'");
    if (d.dataset_id.empty()) add("empty dataset_id");
    if (d.num_samples < 1) add("dataset '" + d.dataset_id + "': num_samples must be positive");
    if (d.num_classes < 2) add("dataset '" + d.dataset_id + "': num_classes must be at least 2");
    if (d.num_samples < d.num_classes) add("dataset '" + d.dataset_id + "': num_samples < num_classes");
  }

  std::set<std::tuple<std::string, std::string, RecordKind>> records;
  for (std::size_t i = 0; i < zoo.history().size(); ++i) {
    const auto& r = zoo.history()[i];
    const std::string tag = "history row " + std::to_string(i + 1) + " (" + r.model_id + "," + r.dataset_id + ")";
    if (!zoo.model_index(r.model_id)) add(tag + ": unknown model '" + r.model_id + "'");
    if (!zoo.dataset_index(r.dataset_id)) add(tag + ": unknown dataset '" + r.dataset_id + "'");
    if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0)) add(tag + ": accuracy out of [0,1]");
    if (!records.emplace(r.model_id, r.dataset_id, r.kind).second) {
      add(tag + ": duplicate " + std::string(to_string(r.kind)) + " record");
    }
  }

  for (const auto& [id, f] : zoo.features()) {
    if (!zoo.dataset_index(id)) add("features for unknown dataset '" + id + "'");
    if (f.rows.rows() < 1 || f.rows.cols() < 1) add("features for '" + id + "': empty matrix");
    if (!f.rows.allFinite()) add("features for '" + id + "': non-finite entry");
  }

  std::set<std::tuple<std::string, std::string, TransferMethod>> transfers;
  for (std::size_t i = 0; i < zoo.transfer_scores().size(); ++i) {
    const auto& t = zoo.transfer_scores()[i];
    const std::string tag = "transfer row " + std::to_string(i + 1) + " (" + t.model_id + "," + t.dataset_id + ")";
    if (!zoo.model_index(t.model_id)) add(tag + ": unknown model '" + t.model_id + "'");
    if (!zoo.dataset_index(t.dataset_id)) add(tag + ": unknown dataset '" + t.dataset_id + "'");
    if (!std::isfinite(t.score)) add(tag + ": non-finite score");
    if (!transfers.emplace(t.model_id, t.dataset_id, t.method).second) add(tag + ": duplicate score");
  }
  return report;
}

namespace {

std::optional<std::string> optional_cell(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return cell;
}

[[noreturn]] void bad_category(const csv::Table& t, std::size_t row, std::string_view what, const std::string& value) {
  raise(ErrorKind::ParseError, "invalid " + std::string(what) + " '" + value + "' at " + t.path.string() + ":" +
                                   std::to_string(t.line_numbers[row]));
}

std::string row_ref(const csv::Table& t, std::size_t row) {
  return t.path.string() + ":" + std::to_string(t.line_numbers[row]);
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const fs::path& file) {
  auto t = csv::read(file);
  const auto cols = static_cast<Eigen::Index>(t.header.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), cols);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), c) = csv::parse_real(t.rows[r][static_cast<std::size_t>(c)], file, t.line_numbers[r]);
    }
  }
  return m;
}

void write_matrix_csv(const Eigen::MatrixXd& m, const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) raise(ErrorKind::MissingInput, "cannot write " + file.string());
  std::vector<std::string> cells;
  for (Eigen::Index c = 0; c < m.cols(); ++c) cells.push_back("f" + std::to_string(c));
  csv::write_row(out, cells);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    cells.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) cells.push_back(csv::format_real(m(r, c)));
    csv::write_row(out, cells);
  }
}

std::vector<TransferRecord> read_transfer_scores(const fs::path& file, const fs::path&) {
  auto t = csv::read(file);
  const auto c_model = t.column("model_id"), c_data = t.column("dataset_id"), c_method = t.column("method"),
             c_score = t.column("score");
  std::vector<TransferRecord> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto method = parse_transfer_method(row[c_method]);
    if (!method) bad_category(t, r, "method", row[c_method]);
    out.push_back({row[c_model], row[c_data], *method, csv::parse_real(row[c_score], file, t.line_numbers[r])});
  }
  return out;
}

void write_transfer_scores(const std::vector<TransferRecord>& records, const fs::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) raise(ErrorKind::MissingInput, "cannot write " + file.string());
  csv::write_row(out, {"model_id", "dataset_id", "method", "score"});
  for (const auto& r : records) {
    csv::write_row(out, {r.model_id, r.dataset_id, std::string(to_string(r.method)), csv::format_real(r.score)});
  }
}

Zoo load_zoo(const fs::path& root) {
  for (const char* name : {"models.csv", "datasets.csv", "history.csv"}) {
    if (!fs::exists(root / name)) raise(ErrorKind::MissingInput, "missing " + (root / name).string());
  }
  ZooData data;

  {
    auto t = csv::read(root / "models.csv");
    const auto c_id = t.column("model_id"), c_arch = t.column("architecture"),
               c_pre = t.column("pretrained_dataset_id"), c_shape = t.column("input_shape"),
               c_params = t.column("num_params"), c_mem = t.column("memory_mb"),
               c_acc = t.column("pretrained_accuracy");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      const auto line = t.line_numbers[r];
      ModelCard m;
      m.model_id = row[c_id];
      m.architecture = row[c_arch];
      m.pretrained_dataset_id = optional_cell(row[c_pre]);
      m.input_shape = csv::parse_int(row[c_shape], t.path, line);
      m.num_params = csv::parse_int(row[c_params], t.path, line);
      m.memory_mb = csv::parse_real(row[c_mem], t.path, line);
      if (!row[c_acc].empty()) m.pretrained_accuracy = csv::parse_real(row[c_acc], t.path, line);
      data.models.push_back(std::move(m));
    }
  }

  {
    auto t = csv::read(root / "datasets.csv");
    const auto c_id = t.column("dataset_id"), c_n = t.column("num_samples"), c_k = t.column("num_classes"),
               c_mod = t.column("modality");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      const auto line = t.line_numbers[r];
      auto modality = parse_modality(row[c_mod]);
      if (!modality) bad_category(t, r, "modality", row[c_mod]);
      data.datasets.push_back({row[c_id], csv::parse_int(row[c_n], t.path, line),
                               csv::parse_int(row[c_k], t.path, line), *modality});
    }
  }

  std::set<std::string> model_ids, dataset_ids;
  for (const auto& m : data.models) model_ids.insert(m.model_id);
  for (const auto& d : data.datasets) dataset_ids.insert(d.dataset_id);

  {
    auto t = csv::read(root / "history.csv");
    const auto c_m = t.column("model_id"), c_d = t.column("dataset_id"), c_acc = t.column("accuracy"),
               c_kind = t.column("kind");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      auto kind = parse_record_kind(row[c_kind]);
      if (!kind) bad_category(t, r, "kind", row[c_kind]);
      if (!model_ids.count(row[c_m])) {
        raise(ErrorKind::IntegrityError, "unknown model '" + row[c_m] + "' at " + row_ref(t, r));
      }
      if (!dataset_ids.count(row[c_d])) {
        raise(ErrorKind::IntegrityError, "unknown dataset '" + row[c_d] + "' at " + row_ref(t, r));
      }
      data.history.push_back({row[c_m], row[c_d], csv::parse_real(row[c_acc], t.path, t.line_numbers[r]), *kind});
    }
  }

  if (fs::is_directory(root / "features")) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root / "features")) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const std::string id = file.stem().string();
      if (!dataset_ids.count(id)) raise(ErrorKind::IntegrityError, "features for unknown dataset: " + file.string());
      auto m = read_matrix_csv(file);
      if (m.rows() < 1 || m.cols() < 1) raise(ErrorKind::ParseError, "empty feature matrix: " + file.string());
      data.features.emplace(id, SampleFeatureMatrix{id, std::move(m)});
    }
  }

  if (fs::exists(root / "transfer_scores.csv")) {
    data.transfer_scores = read_transfer_scores(root / "transfer_scores.csv");
    for (std::size_t i = 0; i < data.transfer_scores.size(); ++i) {
      const auto& rec = data.transfer_scores[i];
      if (!model_ids.count(rec.model_id) || !dataset_ids.count(rec.dataset_id)) {
        raise(ErrorKind::IntegrityError, "unknown id in " + (root / "transfer_scores.csv").string() + " row " +
                                             std::to_string(i + 1) + " (" + rec.model_id + "," + rec.dataset_id + ")");
      }
    }
  }

  Zoo zoo(std::move(data));
  auto report = validate_zoo(zoo);
  if (!report.clean()) raise(ErrorKind::IntegrityError, root.string() + ": " + report.violations.front());
  return zoo;
}

void save_zoo(const Zoo& zoo, const fs::path& root) {
  fs::create_directories(root);
  auto open = [](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) raise(ErrorKind::MissingInput, "cannot write " + p.string());
    return out;
  };
  {
    auto out = open(root / "models.csv");
    csv::write_row(out, {"model_id", "architecture", "pretrained_dataset_id", "input_shape", "num_params",
                         "memory_mb", "pretrained_accuracy"});
    for (const auto& m : zoo.models()) {
      csv::write_row(out, {m.model_id, m.architecture, m.pretrained_dataset_id.value_or(""),
                           std::to_string(m.input_shape), std::to_string(m.num_params), csv::format_real(m.memory_mb),
                           m.pretrained_accuracy ? csv::format_real(*m.pretrained_accuracy) : std::string()});
    }
  }
  {
    auto out = open(root / "datasets.csv");
    csv::write_row(out, {"dataset_id", "num_samples", "num_classes", "modality"});
    for (const auto& d : zoo.datasets()) {
      csv::write_row(out, {d.dataset_id, std::to_string(d.num_samples), std::to_string(d.num_classes),
                           std::string(to_string(d.modality))});
    }
  }
  {
    auto out = open(root / "history.csv");
    csv::write_row(out, {"model_id", "dataset_id", "accuracy", "kind"});
    for (const auto& r : zoo.history()) {
      csv::write_row(out, {r.model_id, r.dataset_id, csv::format_real(r.accuracy), std::string(to_string(r.kind))});
    }
  }
  if (!zoo.features().empty()) {
    fs::create_directories(root / "features");
    for (const auto& [id, f] : zoo.features()) write_matrix_csv(f.rows, root / "features" / (id + ".csv"));
  }
  if (!zoo.transfer_scores().empty()) write_transfer_scores(zoo.transfer_scores(), root / "transfer_scores.csv");
}

}  // namespace zgs
