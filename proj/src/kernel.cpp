#include "gdm/kernel.hpp"

#include "gdm/mixture.hpp"
#include "gdm/numeric.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

namespace gdm {

namespace {

Eigen::VectorXd pairwise_columns(const Eigen::MatrixXd& x, Eigen::Index begin, Eigen::Index n) {
  if (n == 1) return x.col(begin);
  const Eigen::Index half = n / 2;
  return pairwise_columns(x, begin, half) + pairwise_columns(x, begin + half, n - half);
}

// Runs body(begin, end) over contiguous chunks of [0, n).
template <typename Body>
void parallel_chunks(Eigen::Index n, int threads, Body&& body) {
  const Eigen::Index workers = std::clamp<Eigen::Index>(threads, 1, std::max<Eigen::Index>(n, 1));
  if (workers <= 1) {
    body(Eigen::Index(0), n);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const Eigen::Index chunk = (n + workers - 1) / workers;
  for (Eigen::Index w = 0; w < workers; ++w) {
    const Eigen::Index b = w * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      try {
        body(b, e);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Context {
  const ChoiceDataset& ds;
  const Model& model;
  const Eigen::VectorXd& theta;
  Eigen::MatrixXd coefficients;      // P x M
  Eigen::VectorXd shared_log_prior;  // set when the prior is individual-invariant
};

struct Workspace {
  Eigen::MatrixXd utilities;
  Eigen::MatrixXd residual;
  Eigen::VectorXd panel;
};

void fill_panel(const Context& ctx, Eigen::Index n, Workspace& w, bool with_residual) {
  const ChoiceDataset& ds = ctx.ds;
  const Eigen::Index t0 = ds.task_offset[n], t1 = ds.task_offset[n + 1];
  const Eigen::Index r0 = ds.row_offset[t0], r1 = ds.row_offset[t1];
  const Eigen::Index M = ctx.coefficients.cols();
  w.utilities.noalias() = ctx.model.design.middleRows(r0, r1 - r0) * ctx.coefficients;
  w.panel.setZero(M);
  if (with_residual) w.residual.setZero(r1 - r0, M);
  for (Eigen::Index t = t0; t < t1; ++t) {
    const Eigen::Index b = ds.row_offset[t] - r0, e = ds.row_offset[t + 1] - r0;
    const Eigen::Index c = ds.chosen_row[t] - r0;
    for (Eigen::Index m = 0; m < M; ++m) {
      double hi = neg_inf<double>();
      for (Eigen::Index r = b; r < e; ++r) {
        if (!ds.available[r0 + r]) continue;
        const double v = w.utilities(r, m);
        if (!std::isfinite(v))
          throw NonFiniteUtility("non-finite utility for individual '" + ds.individual_ids[n] + "'");
        hi = std::max(hi, v);
      }
      double sum = 0.0;
      for (Eigen::Index r = b; r < e; ++r)
        if (ds.available[r0 + r]) sum += std::exp(w.utilities(r, m) - hi);
      const double lse = hi + std::log(sum);
      w.panel(m) += w.utilities(c, m) - lse;
      if (with_residual) {
        for (Eigen::Index r = b; r < e; ++r)
          if (ds.available[r0 + r]) w.residual(r, m) = -std::exp(w.utilities(r, m) - lse);
        w.residual(c, m) += 1.0;
      }
    }
  }
}

Eigen::VectorXd prior_for(const Context& ctx, Eigen::Index n) {
  if (ctx.shared_log_prior.size() > 0) return ctx.shared_log_prior;
  return log_prior_shares(ctx.model, ctx.theta, n);
}

// Log-likelihood of individual n; accumulates the gradient into `grad` when
// non-null.
double evaluate_individual(const Context& ctx, Eigen::Index n, Workspace& w, double* grad) {
  const Model& model = ctx.model;
  fill_panel(ctx, n, w, grad != nullptr);
  const Eigen::VectorXd log_prior = prior_for(ctx, n);
  const Eigen::VectorXd joint = log_prior + w.panel;
  const double ll = log_sum_exp(joint);
  if (!grad) return ll;

  const Eigen::Index M = joint.size();
  const Eigen::VectorXd posterior = exp_of((joint.array() - ll).matrix());
  const ChoiceDataset& ds = ctx.ds;
  const Eigen::Index r0 = ds.row_offset[ds.task_offset[n]];
  const Eigen::Index rows = w.utilities.rows();
  const Eigen::MatrixXd scores = model.design.middleRows(r0, rows).transpose() * w.residual;  // P x M

  const auto P = static_cast<Eigen::Index>(model.coefficients.size());
  for (Eigen::Index c = 0; c < P; ++c) {
    const int k = model.coefficient_block[c];
    if (k < 0) {
      grad[model.coefficient_parameter[c][0]] += scores.row(c).dot(posterior);
    } else {
      for (Eigen::Index m = 0; m < M; ++m)
        grad[model.coefficient_parameter[c][model.mixture.lambda(k, m) - 1]] += scores(c, m) * posterior(m);
    }
  }

  if (model.family() == Family::MNL) return ll;
  const Eigen::VectorXd diff = posterior - exp_of(log_prior);
  const Eigen::Index L = model.socios.cols();
  for (Eigen::Index k = 0; k < model.mixture.n_blocks(); ++k) {
    const int Q = model.mixture.supports[k];
    Eigen::VectorXd by_support = Eigen::VectorXd::Zero(Q);
    for (Eigen::Index m = 0; m < M; ++m) by_support(model.mixture.lambda(k, m) - 1) += diff(m);
    for (int q = 0; q < Q; ++q) {
      grad[model.constant_parameter[k][q]] += by_support(q);
      for (Eigen::Index l = 0; l < L; ++l)
        grad[model.socio_parameter[k][l][q]] += model.socios(n, l) * by_support(q);
    }
  }
  for (std::size_t r = 0; r < model.boost_parameter.size(); ++r) {
    const auto& members = model.mixture.boost_sets[r].members;
    double s = 0.0;
    for (Eigen::Index m = 0; m < M; ++m)
      if (members[m]) s += diff(m);
    grad[model.boost_parameter[r]] += s;
  }
  return ll;
}

Context make_context(const ChoiceDataset& ds, const Model& model, const Eigen::VectorXd& theta) {
  if (theta.size() != model.n_parameters())
    throw std::invalid_argument("parameter vector has the wrong length");
  if (model.design.rows() != ds.n_rows() || model.socios.rows() != ds.n_individuals())
    throw std::invalid_argument("model was compiled against a different dataset");
  Context ctx{ds, model, theta, model.coefficient_matrix(theta), {}};
  if (!model.has_socios()) ctx.shared_log_prior = log_prior_shares(model, theta, 0);
  return ctx;
}

}  // namespace

Eigen::VectorXd pairwise_column_sum(const Eigen::MatrixXd& columns) {
  if (columns.cols() == 0) return Eigen::VectorXd::Zero(columns.rows());
  return pairwise_columns(columns, 0, columns.cols());
}

double mnl_prob(const Eigen::Ref<const Eigen::VectorXd>& utilities, Eigen::Index chosen,
                std::span<const std::uint8_t> available) {
  const Eigen::Index J = utilities.size();
  if (static_cast<Eigen::Index>(available.size()) != J)
    throw std::invalid_argument("availability length differs from utilities");
  if (chosen < 0 || chosen >= J || !available[chosen])
    throw std::invalid_argument("chosen alternative is unavailable");
  double hi = neg_inf<double>();
  for (Eigen::Index i = 0; i < J; ++i)
    if (available[i]) hi = std::max(hi, utilities(i));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < J; ++i)
    if (available[i]) sum += std::exp(utilities(i) - hi);
  return std::exp(utilities(chosen) - hi) / sum;
}

Eigen::MatrixXd utility_table(const Model& model, const Eigen::VectorXd& theta) {
  return model.design * model.coefficient_matrix(theta);
}

Eigen::VectorXd panel_loglik_per_class(const ChoiceDataset& ds, const Eigen::MatrixXd& utilities,
                                       Eigen::Index mixture) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ds.n_individuals());
  for (Eigen::Index n = 0; n < ds.n_individuals(); ++n) {
    for (auto t = ds.task_offset[n]; t < ds.task_offset[n + 1]; ++t) {
      const auto b = ds.row_offset[t], e = ds.row_offset[t + 1];
      const std::span<const std::uint8_t> avail(ds.available.data() + b, static_cast<std::size_t>(e - b));
      out(n) += std::log(mnl_prob(utilities.col(mixture).segment(b, e - b), ds.chosen_row[t] - b, avail));
    }
  }
  return out;
}

Eigen::VectorXd lc_allocation(const Eigen::VectorXd& socios, const Eigen::VectorXd& constants,
                              const Eigen::MatrixXd& coefficients) {
  return exp_of(log_softmax_allocation<double>(socios, constants, coefficients));
}

Eigen::VectorXd support_weights(const Eigen::VectorXd& socios, const Eigen::VectorXd& constants,
                                const Eigen::MatrixXd& coefficients) {
  return exp_of(log_softmax_allocation<double>(socios, constants, coefficients));
}

Eigen::VectorXd log_prior_shares(const Model& model, const Eigen::VectorXd& theta, Eigen::Index n) {
  if (model.family() == Family::MNL) return Eigen::VectorXd::Zero(1);
  const Eigen::Index K = model.mixture.n_blocks();
  const Eigen::Index L = model.socios.cols();
  const Eigen::VectorXd z = L > 0 ? Eigen::VectorXd(model.socios.row(n).transpose()) : Eigen::VectorXd();
  std::vector<Eigen::VectorXd> log_weights;
  log_weights.reserve(static_cast<std::size_t>(K));
  for (Eigen::Index k = 0; k < K; ++k) {
    const int Q = model.mixture.supports[k];
    Eigen::VectorXd constants(Q);
    Eigen::MatrixXd coefficients(L, Q);
    for (int q = 0; q < Q; ++q) {
      constants(q) = theta(model.constant_parameter[k][q]);
      for (Eigen::Index l = 0; l < L; ++l) coefficients(l, q) = theta(model.socio_parameter[k][l][q]);
    }
    log_weights.push_back(log_softmax_allocation<double>(z, constants, coefficients));
  }
  if (model.family() == Family::LC) return log_weights.front();
  std::vector<double> boosts;
  for (auto i : model.boost_parameter) boosts.push_back(theta(i));
  return log_mixture_shares<double>(log_weights, model.mixture, boosts);
}

IndividualTerms individual_terms(const ChoiceDataset& ds, const Model& model,
                                 const Eigen::VectorXd& theta, Eigen::Index n) {
  const Context ctx = make_context(ds, model, theta);
  Workspace w;
  fill_panel(ctx, n, w, false);
  return {prior_for(ctx, n), w.panel};
}

LogLikelihood total_loglik(const ChoiceDataset& ds, const Model& model, const Eigen::VectorXd& theta,
                           const EvalOptions& options) {
  const Context ctx = make_context(ds, model, theta);
  const Eigen::Index N = ds.n_individuals();
  LogLikelihood out;
  out.per_individual.resize(N);
  parallel_chunks(N, options.threads, [&](Eigen::Index b, Eigen::Index e) {
    Workspace w;
    for (Eigen::Index n = b; n < e; ++n) out.per_individual(n) = evaluate_individual(ctx, n, w, nullptr);
  });
  out.total = pairwise_sum(out.per_individual.data(), static_cast<std::size_t>(N));
  return out;
}

LogLikelihoodGradient loglik_gradient(const ChoiceDataset& ds, const Model& model,
                                      const Eigen::VectorXd& theta, const EvalOptions& options) {
  const Context ctx = make_context(ds, model, theta);
  const Eigen::Index N = ds.n_individuals();
  const Eigen::Index npar = model.n_parameters();
  LogLikelihoodGradient out;
  out.per_individual.resize(N);
  Eigen::MatrixXd per_grad = Eigen::MatrixXd::Zero(npar, N);
  parallel_chunks(N, options.threads, [&](Eigen::Index b, Eigen::Index e) {
    Workspace w;
    for (Eigen::Index n = b; n < e; ++n)
      out.per_individual(n) = evaluate_individual(ctx, n, w, per_grad.col(n).data());
  });
  out.total = pairwise_sum(out.per_individual.data(), static_cast<std::size_t>(N));
  out.gradient = pairwise_column_sum(per_grad);
  for (Eigen::Index i = 0; i < npar; ++i)
    if (!model.initial.free[i]) out.gradient(i) = 0.0;
  return out;
}

double null_loglik(const ChoiceDataset& ds) {
  std::vector<double> per_task(static_cast<std::size_t>(ds.n_tasks()));
  for (Eigen::Index t = 0; t < ds.n_tasks(); ++t) {
    int n_avail = 0;
    for (auto r = ds.row_offset[t]; r < ds.row_offset[t + 1]; ++r) n_avail += ds.available[r];
    per_task[t] = -std::log(static_cast<double>(n_avail));
  }
  return pairwise_sum(per_task.data(), per_task.size());
}

}  // namespace gdm
