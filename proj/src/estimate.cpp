#include "gdm/estimate.hpp"

#include "gdm/optimizer.hpp"
#include "gdm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gdm {

std::string to_string(FitStatus status) {
  switch (status) {
    case FitStatus::Converged: return "converged";
    case FitStatus::NotConverged: return "not-converged";
    case FitStatus::SaddleOrBoundary: return "saddle/boundary";
  }
  return "?";
}

FitStatus parse_fit_status(const std::string& text) {
  if (text == "converged") return FitStatus::Converged;
  if (text == "not-converged") return FitStatus::NotConverged;
  if (text == "saddle/boundary") return FitStatus::SaddleOrBoundary;
  throw std::invalid_argument("unknown fit status '" + text + "'");
}

InformationCriteria information_criteria(double ll, Eigen::Index n_free, Eigen::Index n_obs) {
  if (n_free < 1 || n_obs < 1) throw std::invalid_argument("information criteria need n_free >= 1 and n_obs >= 1");
  const double k = static_cast<double>(n_free);
  return {-2.0 * ll + 2.0 * k, -2.0 * ll + k * std::log(static_cast<double>(n_obs))};
}

namespace {

Eigen::VectorXd free_gradient(const LogLikelihoodGradient& lg, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) g(static_cast<Eigen::Index>(j)) = lg.gradient(idx[j]);
  return g;
}

bool is_pd(const Eigen::VectorXd& eig) {
  if (eig.size() == 0) return true;
  return eig.minCoeff() > 1e-8 * std::max(1.0, eig.maxCoeff());
}

}  // namespace

Inference compute_inference(const ChoiceDataset& ds, const Model& model, const ParameterSet& params,
                            int threads, double boundary_threshold) {
  const auto idx = params.free_indices();
  const auto F = static_cast<Eigen::Index>(idx.size());
  const EvalOptions eval{threads};
  Eigen::MatrixXd H(F, F);
  for (Eigen::Index j = 0; j < F; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(params.values(idx[j])));
    Eigen::VectorXd up = params.values, down = params.values;
    up(idx[j]) += h;
    down(idx[j]) -= h;
    const Eigen::VectorXd gu = free_gradient(loglik_gradient(ds, model, up, eval), idx);
    const Eigen::VectorXd gd = free_gradient(loglik_gradient(ds, model, down, eval), idx);
    H.col(j) = (gu - gd) / (2.0 * h);
  }
  Inference inf;
  inf.neg_hessian = -0.5 * (H + H.transpose());
  inf.standard_errors.assign(static_cast<std::size_t>(params.size()), std::nullopt);
  if (F == 0) {
    inf.positive_definite = true;
    return inf;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(inf.neg_hessian, Eigen::EigenvaluesOnly);
  inf.min_eigenvalue = full.eigenvalues().minCoeff();
  inf.positive_definite = is_pd(full.eigenvalues());

  const auto alloc = model.allocation_mask();
  const double diag_scale = std::max(1.0, inf.neg_hessian.diagonal().cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < F; ++j) {
    const auto i = idx[j];
    const bool far = alloc[i] && std::abs(params.values(i)) > boundary_threshold;
    const bool flat = inf.neg_hessian(j, j) <= 1e-10 * diag_scale;
    if (far || flat)
      inf.boundary.push_back(params.names[i]);
    else
      keep.push_back(j);
  }
  const auto Kp = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd sub(Kp, Kp);
  for (Eigen::Index a = 0; a < Kp; ++a)
    for (Eigen::Index b = 0; b < Kp; ++b) sub(a, b) = inf.neg_hessian(keep[a], keep[b]);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> part(sub);
  if (Kp > 0 && !is_pd(part.eigenvalues())) return inf;
  const Eigen::MatrixXd cov_sub = part.eigenvectors() * part.eigenvalues().cwiseInverse().asDiagonal() *
                                  part.eigenvectors().transpose();
  inf.covariance = Eigen::MatrixXd::Constant(F, F, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index a = 0; a < Kp; ++a) {
    for (Eigen::Index b = 0; b < Kp; ++b) inf.covariance(keep[a], keep[b]) = cov_sub(a, b);
    inf.standard_errors[idx[keep[a]]] = std::sqrt(cov_sub(a, a));
  }
  return inf;
}

ParameterSet transfer_parameters(const ParameterSet& from, const Model& to) {
  ParameterSet out = to.initial;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (!out.free[i]) continue;
    if (const auto j = from.find(out.names[i])) out.values(i) = from.values(*j);
  }
  return out;
}

ParameterSet match_prior_shares(const Model& model, ParameterSet params,
                                const Eigen::VectorXd& target_log_shares, double floor) {
  const Eigen::Index M = model.n_mixtures();
  if (target_log_shares.size() != M) throw std::invalid_argument("one target share per mixture required");
  if (model.family() == Family::MNL) return params;
  std::vector<Eigen::Index> unknowns;
  for (const auto& qs : model.constant_parameter)
    for (auto i : qs)
      if (params.free[i]) unknowns.push_back(i);
  for (auto i : model.boost_parameter)
    if (params.free[i]) unknowns.push_back(i);
  for (const auto& ls : model.socio_parameter)
    for (const auto& qs : ls)
      for (auto i : qs)
        if (params.free[i]) params.values(i) = 0.0;

  const auto U = static_cast<Eigen::Index>(unknowns.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, U + 1);
  Eigen::VectorXd rhs(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const double t = target_log_shares(m);
    rhs(m) = std::isfinite(t) ? std::max(t, floor) : floor;
    A(m, U) = 1.0;  // common shift
    for (Eigen::Index k = 0; k < model.mixture.n_blocks(); ++k) {
      const auto i = model.constant_parameter[k][model.mixture.lambda(k, m) - 1];
      const auto it = std::find(unknowns.begin(), unknowns.end(), i);
      if (it == unknowns.end())
        rhs(m) -= params.values(i);
      else
        A(m, it - unknowns.begin()) += 1.0;
    }
    if (model.family() == Family::GDM) {
      for (std::size_t r = 0; r < model.boost_parameter.size(); ++r) {
        if (!model.mixture.boost_sets[r].members[m]) continue;
        const auto i = model.boost_parameter[r];
        const auto it = std::find(unknowns.begin(), unknowns.end(), i);
        if (it == unknowns.end())
          rhs(m) -= params.values(i);
        else
          A(m, it - unknowns.begin()) += 1.0;
      }
    }
  }
  const Eigen::VectorXd x = A.completeOrthogonalDecomposition().solve(rhs);
  for (Eigen::Index u = 0; u < U; ++u) params.values(unknowns[u]) = x(u);
  return params;
}

Canonical canonicalize(const Model& model, const ParameterSet& params) {
  Canonical out{model.heterogeneity, params};
  const auto& h = model.heterogeneity;
  if (model.family() == Family::MNL) return out;
  // new label (1-based) for each old support, per block
  std::vector<std::vector<int>> relabel(h.blocks.size());
  bool changed = false;
  for (std::size_t k = 0; k < h.blocks.size(); ++k) {
    const int Q = model.mixture.supports[k];
    relabel[k].resize(static_cast<std::size_t>(Q));
    std::iota(relabel[k].begin(), relabel[k].end(), 1);
    if (Q < 2) continue;
    // Blocks with user-fixed support parameters keep their labels.
    bool locked = false;
    std::vector<Eigen::Index> members;
    for (std::size_t c = 0; c < model.coefficients.size(); ++c)
      if (model.coefficient_block[c] == static_cast<int>(k)) members.push_back(static_cast<Eigen::Index>(c));
    for (auto c : members)
      for (auto i : model.coefficient_parameter[c]) locked = locked || !params.free[i];
    for (int q = 1; q < Q; ++q) {
      locked = locked || !params.free[model.constant_parameter[k][q]];
      for (const auto& ls : model.socio_parameter[k]) locked = locked || !params.free[ls[q]];
    }
    if (locked) continue;
    const auto& lead = model.coefficient_parameter[members.front()];
    std::vector<int> order(static_cast<std::size_t>(Q));  // order[new] = old
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return params.values(lead[a]) < params.values(lead[b]);
    });
    bool identity = true;
    for (int q = 0; q < Q; ++q) identity = identity && order[q] == q;
    if (identity) continue;
    changed = true;
    for (int nq = 0; nq < Q; ++nq) relabel[k][order[nq]] = nq + 1;
    for (auto c : members) {
      const auto& ids = model.coefficient_parameter[c];
      for (int nq = 0; nq < Q; ++nq) out.params.values(ids[nq]) = params.values(ids[order[nq]]);
    }
    const auto& cs = model.constant_parameter[k];
    const double base = params.values(cs[order[0]]);
    for (int nq = 0; nq < Q; ++nq) out.params.values(cs[nq]) = params.values(cs[order[nq]]) - base;
    for (const auto& ls : model.socio_parameter[k]) {
      const double zbase = params.values(ls[order[0]]);
      for (int nq = 0; nq < Q; ++nq) out.params.values(ls[nq]) = params.values(ls[order[nq]]) - zbase;
    }
  }
  if (!changed) return out;
  for (auto& boost : out.heterogeneity.boosts) {
    BoostPredicate relabeled;
    for (const auto& term : boost.predicate.terms) {
      if (term.block == "*") {
        for (std::size_t k = 0; k < h.blocks.size(); ++k)
          relabeled.terms.push_back({h.blocks[k].name, relabel[k][term.support - 1]});
      } else {
        const auto it = std::find_if(h.blocks.begin(), h.blocks.end(),
                                     [&](const Block& b) { return b.name == term.block; });
        const auto k = static_cast<std::size_t>(it - h.blocks.begin());
        relabeled.terms.push_back({term.block, relabel[k][term.support - 1]});
      }
    }
    boost.predicate = std::move(relabeled);
  }
  return out;
}

EstimationResult fit(const ChoiceDataset& ds, const Model& model, const FitOptions& options) {
  const EvalOptions eval{options.threads};
  ParameterSet base = model.initial;
  const auto idx = base.free_indices();
  const auto alloc = model.allocation_mask();

  struct Start {
    std::string origin;
    Eigen::VectorXd x;
  };
  std::vector<Start> starts;
  starts.push_back({"initial", base.free_values()});
  Rng rng(options.seed);
  for (int s = 1; s < std::max(1, options.starts); ++s) {
    Eigen::VectorXd x = base.free_values();
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const double w = alloc[idx[j]] ? options.allocation_jitter : options.utility_jitter;
      x(static_cast<Eigen::Index>(j)) += rng.uniform(-w, w);
    }
    starts.push_back({"jitter", std::move(x)});
  }
  for (const auto& extra : options.extra_starts)
    starts.push_back({"supplied", transfer_parameters(extra, model).free_values()});

  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    ParameterSet p = base;
    p.set_free_values(x);
    const auto lg = loglik_gradient(ds, model, p.values, eval);
    if (grad) *grad = -free_gradient(lg, idx);
    return -lg.total;
  };

  EstimationResult res;
  res.label = options.label.empty() ? to_string(model.family()) : options.label;
  BfgsOptions bopts;
  bopts.gradient_tolerance = options.tolerance;
  bopts.max_iterations = options.max_iterations;
  std::optional<BfgsResult> best;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    BfgsResult r = minimize_bfgs(objective, starts[s].x, bopts);
    MultistartEntry entry{static_cast<int>(s), starts[s].origin, -r.f, r.iterations, r.converged};
    res.multistart.push_back(entry);
    if (!std::isfinite(r.f)) continue;
    const double tie = 1e-9 * std::max(1.0, std::abs(r.f));
    const bool better = !best || r.f < best->f - tie ||
                        (r.f <= best->f + tie &&
                         r.gradient.lpNorm<Eigen::Infinity>() < best->gradient.lpNorm<Eigen::Infinity>());
    if (better) best = std::move(r);
  }
  if (!best) throw std::runtime_error("log-likelihood is not finite at any starting point");

  ParameterSet fitted = base;
  fitted.set_free_values(best->x);
  res.iterations = best->iterations;

  Model final_model = model;
  if (options.canonicalize) {
    Canonical canon = canonicalize(model, fitted);
    Model relabeled = compile_spec(model.utility, canon.heterogeneity, ds, std::max<Eigen::Index>(model.n_mixtures(), 1));
    const double before = total_loglik(ds, model, fitted.values, eval).total;
    const double after = total_loglik(ds, relabeled, canon.params.values, eval).total;
    if (std::abs(before - after) <= 1e-8 * std::max(1.0, std::abs(before))) {
      final_model = std::move(relabeled);
      fitted = canon.params;
    }
  }
  const auto lg = loglik_gradient(ds, final_model, fitted.values, eval);
  res.params = fitted;
  res.utility = final_model.utility;
  res.heterogeneity = final_model.heterogeneity;
  res.ll = lg.total;
  res.gradient_max = free_gradient(lg, fitted.free_indices()).lpNorm<Eigen::Infinity>();
  res.ll0 = null_loglik(ds);
  res.n_free = fitted.n_free();
  res.n_obs = observation_count(ds);
  res.n_individuals = ds.n_individuals();
  const auto ic = information_criteria(res.ll, res.n_free, res.n_obs);
  res.aic = ic.aic;
  res.bic = ic.bic;
  res.dataset_hash = hash_hex(content_hash(ds));
  res.supports = final_model.mixture.supports;
  res.mixtures = final_model.n_mixtures();
  res.standard_errors.assign(static_cast<std::size_t>(fitted.size()), std::nullopt);

  const bool small_gradient = res.gradient_max < options.tolerance;
  if (options.inference) {
    Inference inf = compute_inference(ds, final_model, fitted, options.threads);
    res.covariance = std::move(inf.covariance);
    res.standard_errors = std::move(inf.standard_errors);
    res.hessian_min_eigenvalue = inf.min_eigenvalue;
    res.boundary = std::move(inf.boundary);
    res.converged = small_gradient && inf.positive_definite && res.boundary.empty();
    if (res.converged)
      res.status = FitStatus::Converged;
    else if (small_gradient)
      res.status = FitStatus::SaddleOrBoundary;
    else
      res.status = FitStatus::NotConverged;
  } else {
    res.converged = small_gradient;
    res.status = small_gradient ? FitStatus::Converged : FitStatus::NotConverged;
  }
  return res;
}

const std::vector<std::optional<double>>& standard_errors(const EstimationResult& result) {
  return result.standard_errors;
}

ComparisonTable compare(const std::vector<EstimationResult>& results) {
  ComparisonTable table;
  if (results.empty()) return table;
  table.dataset_hash = results.front().dataset_hash;
  for (const auto& r : results)
    if (r.dataset_hash != table.dataset_hash)
      throw std::invalid_argument("results '" + results.front().label + "' and '" + r.label +
                                  "' were fitted on different datasets");
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (results[a].bic != results[b].bic) return results[a].bic < results[b].bic;
    return results[a].label < results[b].label;
  });
  std::vector<std::size_t> by_ll = order;
  std::stable_sort(by_ll.begin(), by_ll.end(),
                   [&](std::size_t a, std::size_t b) { return results[a].ll > results[b].ll; });
  for (std::size_t i : order) {
    const auto& r = results[i];
    ComparisonRow row;
    row.label = r.label;
    row.family = to_string(r.family());
    row.n_free = r.n_free;
    if (r.supports.empty()) {
      row.supports = "1";
    } else {
      std::vector<int> distinct = r.supports;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (std::size_t j = 0; j < distinct.size(); ++j)
        row.supports += (j ? "/" : "") + std::to_string(distinct[j]);
    }
    row.groups = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(r.supports.size()));
    row.mixtures = r.mixtures;
    row.ll = r.ll;
    row.bic = r.bic;
    row.ll_rank = static_cast<int>(std::find(by_ll.begin(), by_ll.end(), i) - by_ll.begin()) + 1;
    table.rows.push_back(row);
  }
  for (auto& row : table.rows) row.delta_ll = row.ll - table.rows.front().ll;
  return table;
}

}  // namespace gdm
