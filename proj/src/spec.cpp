#include "gdm/spec.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace gdm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::MNL: return "MNL";
    case Family::LC: return "LC";
    case Family::DM: return "DM";
    case Family::GDM: return "GDM";
  }
  return "?";
}

Family parse_family(const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  if (t == "MNL") return Family::MNL;
  if (t == "LC") return Family::LC;
  if (t == "DM") return Family::DM;
  if (t == "GDM") return Family::GDM;
  throw SpecError("unknown model family '" + text + "' (expected MNL, LC, DM or GDM)");
}

BoostPredicate BoostPredicate::parse(const std::string& text) {
  BoostPredicate p;
  std::string rest = text;
  std::size_t pos = 0;
  while (true) {
    const auto amp = rest.find('&', pos);
    const std::string part = trim(rest.substr(pos, amp == std::string::npos ? std::string::npos : amp - pos));
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw SpecError("boost predicate term '" + part + "' must look like block=support");
    Term term;
    term.block = trim(part.substr(0, eq));
    const std::string q = trim(part.substr(eq + 1));
    try {
      std::size_t used = 0;
      term.support = std::stoi(q, &used);
      if (used != q.size()) throw std::invalid_argument(q);
    } catch (const std::exception&) {
      throw SpecError("boost predicate term '" + part + "' has a non-integer support");
    }
    if (term.block.empty()) throw SpecError("boost predicate term '" + part + "' has no block");
    if (term.support < 1) throw SpecError("boost predicate term '" + part + "' needs a support of at least 1");
    p.terms.push_back(term);
    if (amp == std::string::npos) break;
    pos = amp + 1;
  }
  return p;
}

std::string BoostPredicate::to_string() const {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += " & ";
    out += t.block + "=" + std::to_string(t.support);
  }
  return out;
}

Eigen::Index ParameterSet::n_free() const {
  return static_cast<Eigen::Index>(std::count(free.begin(), free.end(), true));
}

std::optional<Eigen::Index> ParameterSet::find(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<Eigen::Index>(it - names.begin());
}

Eigen::Index ParameterSet::index(const std::string& name) const {
  if (auto i = find(name)) return *i;
  throw SpecError("unknown parameter '" + name + "'");
}

std::vector<Eigen::Index> ParameterSet::free_indices() const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < size(); ++i)
    if (free[i]) out.push_back(i);
  return out;
}

Eigen::VectorXd ParameterSet::free_values() const {
  const auto idx = free_indices();
  Eigen::VectorXd x(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) x(static_cast<Eigen::Index>(j)) = values(idx[j]);
  return x;
}

void ParameterSet::set_free_values(const Eigen::VectorXd& x) {
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < size(); ++i)
    if (free[i]) values(i) = x(j++);
}

std::string support_parameter(const std::string& coefficient, int support) {
  return coefficient + "[" + std::to_string(support) + "]";
}

std::string constant_parameter(const std::string& block, int support) {
  return "delta[" + block + "," + std::to_string(support) + "]";
}

std::string socio_parameter(const std::string& socio, const std::string& block, int support) {
  return "zeta[" + socio + "," + block + "," + std::to_string(support) + "]";
}

Eigen::MatrixXd Model::coefficient_matrix(const Eigen::VectorXd& theta) const {
  const auto P = static_cast<Eigen::Index>(coefficients.size());
  const Eigen::Index M = n_mixtures();
  Eigen::MatrixXd B(P, M);
  for (Eigen::Index c = 0; c < P; ++c) {
    const int k = coefficient_block[c];
    if (k < 0) {
      B.row(c).setConstant(theta(coefficient_parameter[c][0]));
    } else {
      for (Eigen::Index m = 0; m < M; ++m)
        B(c, m) = theta(coefficient_parameter[c][mixture.lambda(k, m) - 1]);
    }
  }
  return B;
}

std::vector<bool> Model::allocation_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(n_parameters()), false);
  for (const auto& qs : constant_parameter)
    for (auto i : qs) mask[i] = true;
  for (const auto& ls : socio_parameter)
    for (const auto& qs : ls)
      for (auto i : qs) mask[i] = true;
  for (auto i : boost_parameter) mask[i] = true;
  return mask;
}

std::vector<BoostSet> resolve_boosts(const HeterogeneitySpec& h, const MixtureStructure& mix) {
  std::vector<BoostSet> out;
  const Eigen::Index M = mix.n_mixtures();
  for (const auto& boost : h.boosts) {
    // (block, support) pairs, expanding "*" to all blocks
    std::vector<std::pair<Eigen::Index, int>> conds;
    for (const auto& term : boost.predicate.terms) {
      if (term.block == "*") {
        for (Eigen::Index k = 0; k < mix.n_blocks(); ++k) {
          if (term.support < 1 || term.support > mix.supports[k])
            throw SpecError("boost '" + boost.name + "': support " + std::to_string(term.support) +
                            " does not exist in block '" + h.blocks[k].name + "'");
          conds.emplace_back(k, term.support);
        }
        continue;
      }
      const auto it = std::find_if(h.blocks.begin(), h.blocks.end(),
                                   [&](const Block& b) { return b.name == term.block; });
      if (it == h.blocks.end())
        throw SpecError("boost '" + boost.name + "' references unknown block '" + term.block + "'");
      const auto k = static_cast<Eigen::Index>(it - h.blocks.begin());
      if (term.support < 1 || term.support > mix.supports[k])
        throw SpecError("boost '" + boost.name + "': support " + std::to_string(term.support) +
                        " does not exist in block '" + term.block + "'");
      conds.emplace_back(k, term.support);
    }
    BoostSet set{boost.name, std::vector<bool>(static_cast<std::size_t>(M), false)};
    for (Eigen::Index m = 0; m < M; ++m) {
      bool hit = true;
      for (const auto& [k, q] : conds) hit = hit && mix.lambda(k, m) == q;
      set.members[m] = hit;
    }
    const auto n = set.count();
    if (n == 0 || n == M)
      throw SpecError("boost '" + boost.name + "' selects " + (n == 0 ? "no" : "every") +
                      " mixture; a boost must select a proper non-empty subset");
    out.push_back(std::move(set));
  }
  return out;
}

Model compile_spec(const UtilitySpec& utility, const HeterogeneitySpec& h, const ChoiceDataset& ds,
                   Eigen::Index mixture_cap) {
  Model model;
  model.utility = utility;
  model.heterogeneity = h;

  // Utility coefficients and design columns.
  std::set<std::string> seen;
  const Eigen::Index R = ds.n_rows();
  std::vector<Eigen::VectorXd> columns;
  for (const auto& term : utility.terms) {
    if (!seen.insert(term.coefficient).second)
      throw SpecError("duplicate coefficient '" + term.coefficient + "'");
    const auto a = ds.attribute_index(term.attribute);
    if (a < 0) throw SpecError("unknown attribute '" + term.attribute + "' for coefficient '" + term.coefficient + "'");
    model.coefficients.push_back(term.coefficient);
    columns.push_back(ds.attributes.col(a));
  }
  for (const auto& asc : utility.constants) {
    if (!seen.insert(asc.coefficient).second)
      throw SpecError("duplicate coefficient '" + asc.coefficient + "'");
    Eigen::VectorXd col = Eigen::VectorXd::Zero(R);
    bool any = false;
    for (Eigen::Index r = 0; r < R; ++r)
      if (ds.alternative_ids[r] == asc.alternative) {
        col(r) = 1.0;
        any = true;
      }
    if (!any)
      throw SpecError("constant '" + asc.coefficient + "' references unknown alternative '" + asc.alternative + "'");
    model.coefficients.push_back(asc.coefficient);
    columns.push_back(std::move(col));
  }
  if (model.coefficients.empty()) throw SpecError("utility has no terms");
  const auto P = static_cast<Eigen::Index>(model.coefficients.size());
  model.design.resize(R, P);
  for (Eigen::Index c = 0; c < P; ++c) model.design.col(c) = columns[c];

  // Family invariants.
  switch (h.family) {
    case Family::MNL:
      if (!h.blocks.empty()) throw SpecError("MNL takes no heterogeneity blocks");
      if (!h.socio_links.empty()) throw SpecError("MNL takes no socio links");
      break;
    case Family::LC:
      if (h.blocks.size() != 1)
        throw SpecError("LC requires exactly one block holding every heterogeneous coefficient");
      break;
    case Family::DM:
    case Family::GDM:
      if (h.blocks.empty()) throw SpecError(to_string(h.family) + " requires at least one block");
      break;
  }
  if (h.family == Family::GDM && h.boosts.empty()) throw SpecError("GDM requires at least one boost");
  if (h.family != Family::GDM && !h.boosts.empty())
    throw SpecError("boosts are only valid for the GDM family");

  model.coefficient_block.assign(static_cast<std::size_t>(P), -1);
  std::set<std::string> block_names;
  for (std::size_t k = 0; k < h.blocks.size(); ++k) {
    const Block& block = h.blocks[k];
    if (block.name.empty() || block.name == "*") throw SpecError("invalid block name '" + block.name + "'");
    if (!block_names.insert(block.name).second) throw SpecError("duplicate block '" + block.name + "'");
    if (block.supports < 1) throw SpecError("block '" + block.name + "' needs at least one support");
    if (block.coefficients.empty()) throw SpecError("block '" + block.name + "' has no coefficients");
    for (const auto& c : block.coefficients) {
      const auto it = std::find(model.coefficients.begin(), model.coefficients.end(), c);
      if (it == model.coefficients.end())
        throw SpecError("block '" + block.name + "' references unknown coefficient '" + c + "'");
      auto& owner = model.coefficient_block[static_cast<std::size_t>(it - model.coefficients.begin())];
      if (owner >= 0)
        throw SpecError("coefficient '" + c + "' is assigned to blocks '" + h.blocks[owner].name +
                        "' and '" + block.name + "'");
      owner = static_cast<int>(k);
    }
  }

  std::vector<int> supports;
  for (const auto& b : h.blocks) supports.push_back(b.supports);
  model.mixture = build_lambda(supports, mixture_cap);
  model.mixture.boost_sets = resolve_boosts(h, model.mixture);

  // Socio links.
  const auto L = static_cast<Eigen::Index>(h.socio_links.size());
  model.socios.resize(ds.n_individuals(), L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const auto s = ds.socio_index(h.socio_links[l]);
    if (s < 0) throw SpecError("unknown socio variable '" + h.socio_links[l] + "'");
    model.socios.col(l) = ds.socios.col(s);
  }

  // Parameter layout.
  ParameterSet& ps = model.initial;
  std::vector<double> values;
  std::vector<bool> free;
  auto add = [&](std::string name, double value, bool is_free) {
    ps.names.push_back(std::move(name));
    values.push_back(value);
    free.push_back(is_free);
    return static_cast<Eigen::Index>(values.size() - 1);
  };
  model.coefficient_parameter.resize(static_cast<std::size_t>(P));
  for (Eigen::Index c = 0; c < P; ++c)
    if (model.coefficient_block[c] < 0)
      model.coefficient_parameter[c].push_back(add(model.coefficients[c], 0.0, true));
  for (std::size_t k = 0; k < h.blocks.size(); ++k) {
    const Block& block = h.blocks[k];
    for (int q = 1; q <= block.supports; ++q) {
      for (Eigen::Index c = 0; c < P; ++c) {
        if (model.coefficient_block[c] != static_cast<int>(k)) continue;
        model.coefficient_parameter[c].push_back(
            add(support_parameter(model.coefficients[c], q), 0.1 * (q - 1), true));
      }
    }
  }
  model.constant_parameter.resize(h.blocks.size());
  model.socio_parameter.resize(h.blocks.size());
  for (std::size_t k = 0; k < h.blocks.size(); ++k) {
    const Block& block = h.blocks[k];
    model.socio_parameter[k].assign(static_cast<std::size_t>(L), {});
    for (int q = 1; q <= block.supports; ++q) {
      model.constant_parameter[k].push_back(add(constant_parameter(block.name, q), 0.0, q > 1));
      for (Eigen::Index l = 0; l < L; ++l)
        model.socio_parameter[k][l].push_back(
            add(socio_parameter(h.socio_links[l], block.name, q), 0.0, q > 1));
    }
  }
  for (const auto& boost : h.boosts) {
    if (std::find(ps.names.begin(), ps.names.end(), boost.name) != ps.names.end())
      throw SpecError("boost name '" + boost.name + "' collides with another parameter");
    model.boost_parameter.push_back(add(boost.name, 0.0, true));
  }
  {
    std::set<std::string> unique(ps.names.begin(), ps.names.end());
    if (unique.size() != ps.names.size()) throw SpecError("parameter names are not unique");
  }
  ps.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  ps.free = free;
  for (const auto& fix : h.fixes) {
    const auto i = ps.find(fix.parameter);
    if (!i) throw SpecError("fix references unknown parameter '" + fix.parameter + "'");
    ps.values(*i) = fix.value;
    ps.free[*i] = false;
  }
  if (ps.n_free() == 0) throw SpecError("model has no free parameters");
  return model;
}

}  // namespace gdm
