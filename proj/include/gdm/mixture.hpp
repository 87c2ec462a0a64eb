#pragma once

#include "gdm/numeric.hpp"

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdm {

inline constexpr Eigen::Index default_mixture_cap = Eigen::Index(1) << 16;

class MixtureCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A named subset of mixtures receiving an additive log-share shift.
struct BoostSet {
  std::string name;
  std::vector<bool> members;  // length M

  Eigen::Index count() const;
};

// Combination matrix over K blocks. Column m assigns support lambda(k, m)
// (1-based) to block k. Columns enumerate the Cartesian product of supports
// in lexicographic order with block 0 varying slowest. With no blocks there
// is a single mixture and lambda is 0 x 1.
struct MixtureStructure {
  std::vector<int> supports;
  Eigen::MatrixXi lambda;
  std::vector<BoostSet> boost_sets;

  Eigen::Index n_blocks() const { return static_cast<Eigen::Index>(supports.size()); }
  Eigen::Index n_mixtures() const { return lambda.cols(); }
};

MixtureStructure build_lambda(std::span<const int> supports, Eigen::Index cap = default_mixture_cap);

// Shares are computed from per-block log weights log(omega_{k,q}):
//   a_m = sum_k log omega_{k, lambda(k,m)} + sum_r boost_r * [m in S_r]
//   log pi_m = a_m - log_sum_exp(a)
// Zero weights map to -inf and drop out of the normalizer. With no boosts the
// normalizer is the renormalized product form, which equals the plain product.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> log_mixture_shares(
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& log_weights,
    const MixtureStructure& mix, std::span<const Scalar> boosts = {}) {
  const Eigen::Index M = mix.n_mixtures();
  const Eigen::Index K = mix.n_blocks();
  if (static_cast<Eigen::Index>(log_weights.size()) != K)
    throw std::invalid_argument("one weight vector per block required");
  if (!boosts.empty() && boosts.size() != mix.boost_sets.size())
    throw std::invalid_argument("one boost per boost set required");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    Scalar s = 0;
    for (Eigen::Index k = 0; k < K; ++k) s += log_weights[k](mix.lambda(k, m) - 1);
    a(m) = s;
  }
  for (std::size_t r = 0; r < boosts.size(); ++r) {
    const auto& members = mix.boost_sets[r].members;
    for (Eigen::Index m = 0; m < M; ++m)
      if (members[m]) a(m) += boosts[r];
  }
  log_normalize(a);
  return a;
}

template <typename Scalar>
std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> log_of(
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& weights) {
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> out;
  out.reserve(weights.size());
  for (const auto& w : weights) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> l(w.size());
    for (Eigen::Index q = 0; q < w.size(); ++q)
      l(q) = w(q) > Scalar(0) ? Scalar(std::log(w(q))) : neg_inf<Scalar>();
    out.push_back(std::move(l));
  }
  return out;
}

// Discrete-mixture shares from per-block support weights.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dm_shares(
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& weights,
    const MixtureStructure& mix) {
  return exp_of(log_mixture_shares<Scalar>(log_of(weights), mix));
}

// Boosted shares: one boost per entry of mix.boost_sets.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gdm_shares(
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& weights,
    const MixtureStructure& mix, std::span<const Scalar> boosts) {
  return exp_of(log_mixture_shares<Scalar>(log_of(weights), mix, boosts));
}

// Plain product form prod_k omega_{k, lambda(k,m)} in linear space.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> product_shares(
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& weights,
    const MixtureStructure& mix) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> pi =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(mix.n_mixtures());
  for (Eigen::Index m = 0; m < mix.n_mixtures(); ++m)
    for (Eigen::Index k = 0; k < mix.n_blocks(); ++k) pi(m) *= weights[k](mix.lambda(k, m) - 1);
  return pi;
}

// Softmax over supports of one block: omega_q ∝ exp(constant_q + z . coef_q).
// `coefficients` is (socios x supports).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> log_softmax_allocation(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& socios,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& constants,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& coefficients) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> u = constants;
  if (socios.size() > 0) u.noalias() += coefficients.transpose() * socios;
  log_normalize(u);
  return u;
}

}  // namespace gdm
