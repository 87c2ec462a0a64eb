#pragma once

#include "gdm/data.hpp"
#include "gdm/kernel.hpp"
#include "gdm/spec.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gdm {

// Posterior mixture membership given each individual's observed choices,
// (individuals x M). Rows sum to one.
Eigen::MatrixXd posterior_shares(const ChoiceDataset& ds, const Model& model, const Eigen::VectorXd& theta);

// Known per-individual coefficients, keyed by individual id then column name.
// Columns are matched to coefficients by coefficient name, else by the
// coefficient's attribute name.
struct TruthTable {
  std::vector<std::string> columns;
  std::map<std::string, std::vector<double>> rows;

  static TruthTable load(const std::filesystem::path& path);
};

struct DiagnosticsTable {
  std::vector<std::string> ids;
  Eigen::VectorXd loglik;                   // per individual
  std::vector<Eigen::Index> modal_mixture;  // 0-based
  std::vector<std::string> coefficients;    // heterogeneous coefficients (all, for MNL)
  Eigen::MatrixXd posterior_mean;           // individuals x coefficients
  Eigen::MatrixXd truth;                    // empty unless truth supplied; NaN when unmatched
  Eigen::MatrixXd error;                    // posterior_mean - truth
};

DiagnosticsTable individual_diagnostics(const ChoiceDataset& ds, const Model& model, const Eigen::VectorXd& theta,
                                        const std::optional<TruthTable>& truth = std::nullopt);

std::string format_diagnostics(const DiagnosticsTable& table);

}  // namespace gdm
