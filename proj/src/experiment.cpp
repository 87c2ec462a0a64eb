#include "gdm/experiment.hpp"

#include <cmath>

namespace gdm {

UtilitySpec price_quality_utility() {
  UtilitySpec u;
  u.terms = {{"b_price", "price"}, {"b_quality", "quality"}};
  return u;
}

HeterogeneitySpec price_quality_heterogeneity(Family family, int supports) {
  HeterogeneitySpec h;
  h.family = family;
  switch (family) {
    case Family::MNL: break;
    case Family::LC: h.blocks = {{"class", {"b_price", "b_quality"}, supports}}; break;
    case Family::GDM:
      h.boosts = {{"diag1", BoostPredicate::parse("cost=1 & quality=1")}};
      for (int q = 2; q <= supports; ++q)
        h.boosts.push_back({"diag" + std::to_string(q), BoostPredicate::parse("*=" + std::to_string(q))});
      [[fallthrough]];
    case Family::DM: h.blocks = {{"cost", {"b_price"}, supports}, {"quality", {"b_quality"}, supports}}; break;
  }
  return h;
}

ParameterSet embed_lc_in_gdm(const EstimationResult& lc, const Model& gdm, double floor) {
  ParameterSet start = transfer_parameters(lc.params, gdm);
  const int Q = lc.supports.front();
  Eigen::VectorXd lc_constants(Q);
  for (int q = 1; q <= Q; ++q) lc_constants(q - 1) = lc.params[constant_parameter(lc.heterogeneity.blocks.front().name, q)];
  log_normalize(lc_constants);
  Eigen::VectorXd target = Eigen::VectorXd::Constant(gdm.n_mixtures(), floor);
  for (Eigen::Index m = 0; m < gdm.n_mixtures(); ++m) {
    const int q = gdm.mixture.lambda(0, m);
    bool diagonal = true;
    for (Eigen::Index k = 1; k < gdm.mixture.n_blocks(); ++k) diagonal = diagonal && gdm.mixture.lambda(k, m) == q;
    if (diagonal && q <= Q) target(m) = lc_constants(q - 1);
  }
  return match_prior_shares(gdm, start, target, floor);
}

ModelLadder fit_ladder(const ChoiceDataset& ds, const FitOptions& options) {
  const UtilitySpec u = price_quality_utility();
  ModelLadder out;
  auto run = [&](Family family, const std::vector<ParameterSet>& extra) {
    const Model model = compile_spec(u, price_quality_heterogeneity(family), ds);
    FitOptions o = options;
    o.label = to_string(family);
    o.extra_starts = extra;
    return fit(ds, model, o);
  };
  out.mnl = run(Family::MNL, {});
  out.lc = run(Family::LC, {});
  out.dm = run(Family::DM, {});
  const Model gdm = compile_spec(u, price_quality_heterogeneity(Family::GDM), ds);
  out.gdm = run(Family::GDM, {out.dm.params, embed_lc_in_gdm(out.lc, gdm)});
  return out;
}

}  // namespace gdm
