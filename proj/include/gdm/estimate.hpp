#pragma once

#include "gdm/data.hpp"
#include "gdm/kernel.hpp"
#include "gdm/spec.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gdm {

enum class FitStatus { Converged, NotConverged, SaddleOrBoundary };
std::string to_string(FitStatus status);
FitStatus parse_fit_status(const std::string& text);

struct FitOptions {
  int starts = 10;  // start 0 is the model's initial point, the rest are jittered
  std::uint64_t seed = 1;
  double tolerance = 1e-5;  // gradient max-norm
  int max_iterations = 500;
  int threads = 1;
  double utility_jitter = 0.5;
  double allocation_jitter = 0.2;
  std::vector<ParameterSet> extra_starts;  // matched to the model by parameter name
  bool canonicalize = true;
  bool inference = true;
  std::string label;
};

struct MultistartEntry {
  int start = 0;
  std::string origin;  // "initial", "jitter" or "supplied"
  double ll = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

// aic = -2 ll + 2 k, bic = -2 ll + k ln(n_obs) with n_obs = choice tasks.
InformationCriteria information_criteria(double ll, Eigen::Index n_free, Eigen::Index n_obs);

struct Inference {
  Eigen::MatrixXd neg_hessian;  // free x free
  Eigen::MatrixXd covariance;   // free x free; empty when not available
  std::vector<std::optional<double>> standard_errors;  // all parameters
  double min_eigenvalue = 0.0;   // of neg_hessian
  bool positive_definite = false;
  std::vector<std::string> boundary;  // parameters excluded from inversion
};

// Hessian by central differences of the analytic gradient over the free
// parameters. Allocation parameters beyond `boundary_threshold` in absolute
// value, and directions with no curvature, are reported as boundary and get
// no standard error.
Inference compute_inference(const ChoiceDataset& ds, const Model& model, const ParameterSet& params,
                            int threads = 1, double boundary_threshold = 10.0);

struct EstimationResult {
  std::string label;
  std::string dataset_hash;
  UtilitySpec utility;
  HeterogeneitySpec heterogeneity;  // after support relabeling
  ParameterSet params;
  double ll = 0.0;
  double ll0 = 0.0;
  Eigen::Index n_free = 0;
  Eigen::Index n_obs = 0;
  Eigen::Index n_individuals = 0;
  double aic = 0.0;
  double bic = 0.0;
  Eigen::MatrixXd covariance;
  std::vector<std::optional<double>> standard_errors;

  FitStatus status = FitStatus::NotConverged;
  bool converged = false;
  int iterations = 0;
  double gradient_max = 0.0;
  double hessian_min_eigenvalue = 0.0;
  std::vector<std::string> boundary;
  std::vector<MultistartEntry> multistart;

  std::vector<int> supports;
  Eigen::Index mixtures = 1;

  Family family() const { return heterogeneity.family; }
};

// Best-of-multistart quasi-Newton maximum likelihood.
EstimationResult fit(const ChoiceDataset& ds, const Model& model, const FitOptions& options = {});

const std::vector<std::optional<double>>& standard_errors(const EstimationResult& result);

// Values of `from` copied into the model's initial point wherever names match.
ParameterSet transfer_parameters(const ParameterSet& from, const Model& to);

// Allocation parameters (constants and boosts; socio coefficients stay at
// zero) whose prior log-shares best match `target_log_shares` in least
// squares. Non-finite targets are clamped to `floor`.
ParameterSet match_prior_shares(const Model& model, ParameterSet params,
                                const Eigen::VectorXd& target_log_shares, double floor = -60.0);

// Reorders supports within each block so that the block's first coefficient
// ascends; constants, socio coefficients and boost predicates follow the
// permutation. Constants are re-normalized against the new first support.
struct Canonical {
  HeterogeneitySpec heterogeneity;
  ParameterSet params;
};
Canonical canonicalize(const Model& model, const ParameterSet& params);

struct ComparisonRow {
  std::string label;
  std::string family;
  Eigen::Index n_free = 0;
  std::string supports;
  Eigen::Index groups = 1;
  Eigen::Index mixtures = 1;
  double ll = 0.0;
  double bic = 0.0;
  double delta_ll = 0.0;  // against the first row
  int ll_rank = 0;        // 1 = highest LL
};

struct ComparisonTable {
  std::string dataset_hash;
  std::vector<ComparisonRow> rows;  // ascending BIC, ties by label
};

ComparisonTable compare(const std::vector<EstimationResult>& results);

}  // namespace gdm
