#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdm {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binds CSV columns to roles. An empty attribute list means every column
// without another role is an attribute.
struct ColumnSchema {
  std::string id = "id";
  std::string task = "task";
  std::string alternative = "alt";
  std::string choice = "choice";
  std::string availability;  // optional; empty = all alternatives available
  std::vector<std::string> attributes;
  std::vector<std::string> socios;
};

// Long-format panel of individuals x tasks x alternatives.
//
// Rows are stored contiguously per task and tasks contiguously per
// individual, so individual n owns tasks [task_offset[n], task_offset[n+1])
// and task t owns rows [row_offset[t], row_offset[t+1]). Individuals appear
// in order of first occurrence in the source, tasks and alternatives in order
// of first occurrence within their parent.
struct ChoiceDataset {
  std::vector<std::string> individual_ids;
  std::vector<std::string> task_ids;         // per task
  std::vector<std::string> alternative_ids;  // per row
  std::vector<Eigen::Index> task_offset;     // size N + 1
  std::vector<Eigen::Index> row_offset;      // size T + 1
  std::vector<Eigen::Index> chosen_row;      // per task, global row index
  std::vector<std::uint8_t> available;       // per row

  std::vector<std::string> attribute_names;
  std::vector<std::string> socio_names;
  Eigen::MatrixXd attributes;  // rows x attributes
  Eigen::MatrixXd socios;      // individuals x socios

  Eigen::Index n_individuals() const { return static_cast<Eigen::Index>(individual_ids.size()); }
  Eigen::Index n_tasks() const { return static_cast<Eigen::Index>(task_ids.size()); }
  Eigen::Index n_rows() const { return static_cast<Eigen::Index>(alternative_ids.size()); }

  Eigen::Index attribute_index(const std::string& name) const;  // -1 if absent
  Eigen::Index socio_index(const std::string& name) const;      // -1 if absent

  bool operator==(const ChoiceDataset&) const;
};

// Total number of choice tasks, sum over individuals of S_n.
inline Eigen::Index observation_count(const ChoiceDataset& ds) { return ds.n_tasks(); }

// Checks every structural invariant; throws DataError naming the first
// offending task.
void validate(const ChoiceDataset& ds);

ChoiceDataset parse_dataset(const std::string& csv_text, const ColumnSchema& schema);
ChoiceDataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema);

// Canonical CSV: id,task,alt,choice,avail,<attributes>,<socios>.
std::string format_dataset(const ChoiceDataset& ds);
void write_dataset(const ChoiceDataset& ds, const std::filesystem::path& path);
ColumnSchema canonical_schema(const ChoiceDataset& ds);

// FNV-1a over the canonical CSV.
std::uint64_t content_hash(const ChoiceDataset& ds);
std::string hash_hex(std::uint64_t hash);

// Decimal text that parses back to exactly the same double.
std::string format_decimal(double value);

// Builds a dataset from a regular shape (every individual has n_tasks tasks of
// n_alternatives alternatives, all available, first alternative chosen).
// Attribute and socio matrices are zero-filled and sized for the caller.
ChoiceDataset make_regular_dataset(Eigen::Index n_individuals, Eigen::Index n_tasks,
                                   Eigen::Index n_alternatives,
                                   std::vector<std::string> attribute_names,
                                   std::vector<std::string> socio_names);

}  // namespace gdm
