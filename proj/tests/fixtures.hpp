#pragma once

#include "gdm/data.hpp"
#include "gdm/spec.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixtures {

// Regular panel with N(0,1) attributes, optional Bernoulli socios, random
// choices and, when J >= 3, some tasks with one non-chosen alternative
// unavailable.
inline gdm::ChoiceDataset random_panel(Eigen::Index N, Eigen::Index S, Eigen::Index J, std::uint64_t seed,
                                       std::vector<std::string> socios = {}, bool vary_availability = true) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  gdm::ChoiceDataset ds = gdm::make_regular_dataset(N, S, J, {"x1", "x2"}, std::move(socios));
  for (Eigen::Index r = 0; r < ds.n_rows(); ++r)
    for (Eigen::Index a = 0; a < ds.attributes.cols(); ++a) ds.attributes(r, a) = normal(gen);
  for (Eigen::Index n = 0; n < N; ++n)
    for (Eigen::Index l = 0; l < ds.socios.cols(); ++l) ds.socios(n, l) = unif(gen) < 0.5 ? 0.0 : 1.0;
  for (Eigen::Index t = 0; t < ds.n_tasks(); ++t) {
    const Eigen::Index r0 = ds.row_offset[t];
    const Eigen::Index chosen = r0 + static_cast<Eigen::Index>(unif(gen) * static_cast<double>(J));
    ds.chosen_row[t] = chosen;
    if (vary_availability && J >= 3 && unif(gen) < 0.4) {
      Eigen::Index off = r0 + static_cast<Eigen::Index>(unif(gen) * static_cast<double>(J));
      if (off != chosen) ds.available[off] = 0;
    }
  }
  return ds;
}

struct Case {
  std::string name;
  gdm::UtilitySpec utility;
  gdm::HeterogeneitySpec heterogeneity;
};

inline gdm::UtilitySpec two_attribute_utility(bool with_constant = true) {
  gdm::UtilitySpec u;
  u.terms = {{"b1", "x1"}, {"b2", "x2"}};
  if (with_constant) u.constants = {{"c2", "2"}};
  return u;
}

// Specifications with at most four mixtures covering every family, grouped
// blocks, socio links and boosts.
inline std::vector<Case> micro_cases(bool socios) {
  using gdm::Family;
  std::vector<std::string> links;
  if (socios) links = {"z1"};
  std::vector<Case> out;
  {
    Case c{"mnl", two_attribute_utility(), {}};
    out.push_back(c);
  }
  for (int q : {2, 3, 4}) {
    Case c{"lc" + std::to_string(q), two_attribute_utility(), {}};
    c.heterogeneity.family = Family::LC;
    c.heterogeneity.blocks = {{"class", {"b1", "b2"}, q}};
    c.heterogeneity.socio_links = links;
    out.push_back(c);
  }
  {
    Case c{"dm2x2", two_attribute_utility(), {}};
    c.heterogeneity.family = Family::DM;
    c.heterogeneity.blocks = {{"A", {"b1"}, 2}, {"B", {"b2"}, 2}};
    c.heterogeneity.socio_links = links;
    out.push_back(c);
  }
  {
    Case c{"dm3", two_attribute_utility(), {}};
    c.heterogeneity.family = Family::DM;
    c.heterogeneity.blocks = {{"A", {"b1"}, 3}};
    c.heterogeneity.socio_links = links;
    out.push_back(c);
  }
  {
    Case c{"gdm_diag", two_attribute_utility(), {}};
    c.heterogeneity.family = Family::GDM;
    c.heterogeneity.blocks = {{"A", {"b1"}, 2}, {"B", {"b2"}, 2}};
    c.heterogeneity.boosts = {{"diag1", gdm::BoostPredicate::parse("A=1 & B=1")},
                              {"diag2", gdm::BoostPredicate::parse("*=2")}};
    c.heterogeneity.socio_links = links;
    out.push_back(c);
  }
  {
    Case c{"gdm_grouped", two_attribute_utility(), {}};
    c.heterogeneity.family = Family::GDM;
    c.heterogeneity.blocks = {{"G", {"b1", "b2"}, 2}, {"H", {"c2"}, 2}};
    c.heterogeneity.boosts = {{"top", gdm::BoostPredicate::parse("G=2 & H=2")}};
    c.heterogeneity.socio_links = links;
    out.push_back(c);
  }
  return out;
}

// Free entries drawn uniformly from [-scale, scale]; fixed entries kept.
inline gdm::ParameterSet random_parameters(const gdm::ParameterSet& start, std::mt19937_64& gen, double scale = 1.0) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  gdm::ParameterSet ps = start;
  for (Eigen::Index i = 0; i < ps.size(); ++i)
    if (ps.free[i]) ps.values(i) = unif(gen);
  return ps;
}

}  // namespace fixtures
