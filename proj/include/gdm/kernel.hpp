#pragma once

#include "gdm/data.hpp"
#include "gdm/spec.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>

namespace gdm {

class NonFiniteUtility : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct EvalOptions {
  int threads = 1;
};

// Logit probability of `chosen` among the available entries of `utilities`,
// stabilized by the maximum available utility.
double mnl_prob(const Eigen::Ref<const Eigen::VectorXd>& utilities, Eigen::Index chosen,
                std::span<const std::uint8_t> available);

// Utilities for every row under every mixture, (rows x M).
Eigen::MatrixXd utility_table(const Model& model, const Eigen::VectorXd& theta);

// Per-individual sum over tasks of log P(chosen | m), read from a
// (rows x M) utility table.
Eigen::VectorXd panel_loglik_per_class(const ChoiceDataset& ds, const Eigen::MatrixXd& utilities,
                                       Eigen::Index mixture);

// Class shares softmax(constants + coefficients^T z); `coefficients` is
// (socios x classes).
Eigen::VectorXd lc_allocation(const Eigen::VectorXd& socios, const Eigen::VectorXd& constants,
                              const Eigen::MatrixXd& coefficients);

// Support weights of one block, same functional form as lc_allocation but
// indexed by support within the block.
Eigen::VectorXd support_weights(const Eigen::VectorXd& socios, const Eigen::VectorXd& constants,
                                const Eigen::MatrixXd& coefficients);

// Log prior mixture shares of individual n under the model's family.
Eigen::VectorXd log_prior_shares(const Model& model, const Eigen::VectorXd& theta, Eigen::Index n);

// Per-mixture terms of one individual: log prior share and panel
// log-likelihood given each mixture.
struct IndividualTerms {
  Eigen::VectorXd log_prior;
  Eigen::VectorXd panel_loglik;
};
IndividualTerms individual_terms(const ChoiceDataset& ds, const Model& model,
                                 const Eigen::VectorXd& theta, Eigen::Index n);

struct LogLikelihood {
  double total = 0.0;
  Eigen::VectorXd per_individual;
};

struct LogLikelihoodGradient {
  double total = 0.0;
  Eigen::VectorXd per_individual;
  Eigen::VectorXd gradient;  // all parameters; fixed entries are zero
};

// LL = sum_n log sum_m pi_{m,n} prod_s P(chosen_ns | m). Individuals may be
// evaluated on several threads; the reduction is a pairwise tree over the
// individual index, so results do not depend on the thread count.
LogLikelihood total_loglik(const ChoiceDataset& ds, const Model& model, const Eigen::VectorXd& theta,
                           const EvalOptions& options = {});

LogLikelihoodGradient loglik_gradient(const ChoiceDataset& ds, const Model& model,
                                      const Eigen::VectorXd& theta, const EvalOptions& options = {});

// Equal-shares log-likelihood: sum over tasks of -log(available alternatives).
double null_loglik(const ChoiceDataset& ds);

}  // namespace gdm
