#pragma once

#include "gdm/data.hpp"
#include "gdm/spec.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace gdm {

enum class Quadrant { BothSensitive = 0, BothInsensitive = 1, CostOnly = 2, QualityOnly = 3 };
std::string to_string(Quadrant q);

// Four-quadrant price/quality preference design. Proportions are ordered
// (both sensitive, both insensitive, cost sensitive only, quality sensitive
// only).
struct QuadrantDesign {
  std::array<double, 4> proportions{0.25, 0.25, 0.25, 0.25};
  double price_insensitive = -0.5;
  double price_sensitive = -2.0;
  double quality_insensitive = 0.25;
  double quality_sensitive = 2.25;
  double jitter = 0.15;  // std. dev. of per-individual coefficient noise
  Eigen::Index n_individuals = 1000;
  Eigen::Index n_tasks = 10;
  std::uint64_t seed = 1;
};

// Generator of choice screens: every alternative draws a price and a quality
// level uniformly from the given level lists.
struct TaskSource {
  Eigen::Index n_alternatives = 8;
  std::vector<double> price_levels{0.0, 2.0, 4.0, 6.0, 8.0};
  std::vector<double> quality_levels{0.0, 1.5, 3.0, 4.5};
};

struct TruePreference {
  std::string id;
  double price = 0.0;
  double quality = 0.0;
  Quadrant quadrant = Quadrant::BothSensitive;
};

struct QuadrantSample {
  ChoiceDataset dataset;  // attributes "price", "quality"
  std::vector<TruePreference> truth;
  std::array<Eigen::Index, 4> counts{};
  double coefficient_correlation = 0.0;  // corr(price coef, quality coef)
  double sensitivity_correlation = 0.0;  // corr(cost-sensitive, quality-sensitive)
};

// Largest-remainder allocation of n items to the given proportions; ties go
// to the lower index.
std::vector<Eigen::Index> allocate_counts(std::span<const double> proportions, Eigen::Index n);

QuadrantSample simulate_quadrant(const QuadrantDesign& design, const TaskSource& tasks = {});

// Presets: "table1-dataset1", "table1-dataset2", "table1-dataset3",
// "visual-10" (ten individuals, fifty tasks each).
QuadrantDesign quadrant_preset(const std::string& name);

struct ModelSample {
  ChoiceDataset dataset;
  std::vector<Eigen::Index> mixture;  // drawn mixture per individual
};

// Redraws the choices of `design` (attributes, availability and socios are
// kept) from the model at `theta`: one mixture per individual from its prior
// shares, then one logit draw per task via Gumbel noise.
ModelSample simulate_from_model(const ChoiceDataset& design, const Model& model,
                                const Eigen::VectorXd& theta, std::uint64_t seed);

struct DesignShape {
  Eigen::Index n_individuals = 100;
  Eigen::Index n_tasks = 10;
  Eigen::Index n_alternatives = 3;
  std::vector<std::string> attributes{"x1", "x2"};
  std::vector<std::string> socios;
};

// Regular design with standard-normal attributes and Bernoulli(1/2) socios.
ChoiceDataset random_design(const DesignShape& shape, std::uint64_t seed);

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

void write_truth(const std::vector<TruePreference>& truth, const std::filesystem::path& path);

}  // namespace gdm
