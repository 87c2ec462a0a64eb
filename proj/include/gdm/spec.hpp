#pragma once

#include "gdm/data.hpp"
#include "gdm/mixture.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdm {

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family { MNL, LC, DM, GDM };

std::string to_string(Family family);
Family parse_family(const std::string& text);

// V = sum_k beta_k x_k over attribute terms plus alternative-specific constants.
struct UtilitySpec {
  struct Term {
    std::string coefficient;
    std::string attribute;
  };
  struct Constant {
    std::string coefficient;
    std::string alternative;
  };
  std::vector<Term> terms;
  std::vector<Constant> constants;
};

// Coefficients whose supports switch together.
struct Block {
  std::string name;
  std::vector<std::string> coefficients;
  int supports = 2;
};

// Conjunction of "block takes support q". Block "*" stands for every block.
struct BoostPredicate {
  struct Term {
    std::string block;
    int support = 1;
  };
  std::vector<Term> terms;

  static BoostPredicate parse(const std::string& text);
  std::string to_string() const;
};

struct Boost {
  std::string name;
  BoostPredicate predicate;
};

struct Fix {
  std::string parameter;
  double value = 0.0;
};

struct HeterogeneitySpec {
  Family family = Family::MNL;
  std::vector<Block> blocks;
  std::vector<Boost> boosts;
  std::vector<std::string> socio_links;
  std::vector<Fix> fixes;
};

// Flat named parameter vector. Fixed entries keep their value during
// estimation.
struct ParameterSet {
  std::vector<std::string> names;
  Eigen::VectorXd values;
  std::vector<bool> free;

  Eigen::Index size() const { return values.size(); }
  Eigen::Index n_free() const;
  // Throws SpecError for unknown names.
  Eigen::Index index(const std::string& name) const;
  std::optional<Eigen::Index> find(const std::string& name) const;
  double operator[](const std::string& name) const { return values(index(name)); }

  Eigen::VectorXd free_values() const;
  void set_free_values(const Eigen::VectorXd& x);
  std::vector<Eigen::Index> free_indices() const;
};

std::string support_parameter(const std::string& coefficient, int support);
std::string constant_parameter(const std::string& block, int support);
std::string socio_parameter(const std::string& socio, const std::string& block, int support);

// A specification resolved against a dataset.
//
// Parameter order: shared utility coefficients in utility order, then for
// each block and each support the block's coefficients, then for each block
// and support the allocation constant followed by its socio coefficients,
// then boosts. LC uses the same layout with a single block whose supports are
// the classes.
struct Model {
  UtilitySpec utility;
  HeterogeneitySpec heterogeneity;
  MixtureStructure mixture;

  std::vector<std::string> coefficients;                   // P, utility order
  std::vector<int> coefficient_block;                      // -1 = shared
  std::vector<std::vector<Eigen::Index>> coefficient_parameter;  // [c][q]
  std::vector<std::vector<Eigen::Index>> constant_parameter;     // [k][q]
  std::vector<std::vector<std::vector<Eigen::Index>>> socio_parameter;  // [k][l][q]
  std::vector<Eigen::Index> boost_parameter;               // [r]

  Eigen::MatrixXd design;  // rows x P
  Eigen::MatrixXd socios;  // individuals x L

  ParameterSet initial;

  Family family() const { return heterogeneity.family; }
  Eigen::Index n_mixtures() const { return mixture.n_mixtures(); }
  Eigen::Index n_parameters() const { return initial.size(); }
  bool has_socios() const { return socios.cols() > 0; }

  // Coefficient values per mixture, (P x M).
  Eigen::MatrixXd coefficient_matrix(const Eigen::VectorXd& theta) const;
  // True for allocation parameters (constants, socio coefficients, boosts).
  std::vector<bool> allocation_mask() const;
};

Model compile_spec(const UtilitySpec& utility, const HeterogeneitySpec& heterogeneity,
                   const ChoiceDataset& ds, Eigen::Index mixture_cap = default_mixture_cap);

// Maps each boost predicate onto the mixtures of `mix`.
std::vector<BoostSet> resolve_boosts(const HeterogeneitySpec& heterogeneity,
                                     const MixtureStructure& mix);

}  // namespace gdm
