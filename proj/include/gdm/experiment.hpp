#pragma once

#include "gdm/estimate.hpp"
#include "gdm/simulate.hpp"

namespace gdm {

// Price/quality utility used by the quadrant experiments:
// V = b_price * price + b_quality * quality.
UtilitySpec price_quality_utility();

// Heterogeneity ladder over the price/quality utility:
//   LC  one block "class" holding both coefficients
//   DM  blocks "cost" {b_price} and "quality" {b_quality}
//   GDM DM plus boosts "diag1" (cost=1 & quality=1) and "diag2" (*=2)
HeterogeneitySpec price_quality_heterogeneity(Family family, int supports = 2);

struct ModelLadder {
  EstimationResult mnl;
  EstimationResult lc;
  EstimationResult dm;
  EstimationResult gdm;
};

// Fits MNL, LC, DM and GDM. The GDM multistart additionally starts from the
// DM optimum (boosts at zero) and from the LC optimum embedded on the
// diagonal mixtures, so its optimum is never worse than either.
ModelLadder fit_ladder(const ChoiceDataset& ds, const FitOptions& options);

// GDM starting point reproducing an LC solution: supports copied by name,
// prior shares matched on the diagonal, off-diagonal mixtures pushed to
// exp(floor).
ParameterSet embed_lc_in_gdm(const EstimationResult& lc, const Model& gdm, double floor = -60.0);

}  // namespace gdm
