#include "gdm/simulate.hpp"

#include "gdm/kernel.hpp"
#include "gdm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace gdm {

double Rng::gumbel() { return -std::log(-std::log(uniform())); }

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::size_t Rng::index(std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return std::min(i, n - 1);
}

std::string to_string(Quadrant q) {
  switch (q) {
    case Quadrant::BothSensitive: return "both-sensitive";
    case Quadrant::BothInsensitive: return "both-insensitive";
    case Quadrant::CostOnly: return "cost-sensitive";
    case Quadrant::QualityOnly: return "quality-sensitive";
  }
  return "?";
}

std::vector<Eigen::Index> allocate_counts(std::span<const double> proportions, Eigen::Index n) {
  std::vector<Eigen::Index> counts(proportions.size());
  std::vector<double> remainder(proportions.size());
  Eigen::Index used = 0;
  for (std::size_t i = 0; i < proportions.size(); ++i) {
    // guard against 0.45 * 1000 = 449.99999...
    const double exact = proportions[i] * static_cast<double>(n);
    const double whole = std::floor(exact + 1e-9);
    counts[i] = static_cast<Eigen::Index>(whole);
    remainder[i] = std::max(0.0, exact - whole);
    used += counts[i];
  }
  std::vector<std::size_t> order(proportions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t j = 0; used < n && j < order.size(); ++j, ++used) ++counts[order[j]];
  return counts;
}

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  return denom > 0 ? da.dot(db) / denom : 0.0;
}

namespace {

void draw_choices(ChoiceDataset& ds, Eigen::Index n, const Eigen::VectorXd& utility_row_offsetless,
                  Eigen::Index row_begin, Rng& rng) {
  for (auto t = ds.task_offset[n]; t < ds.task_offset[n + 1]; ++t) {
    double best = -std::numeric_limits<double>::infinity();
    Eigen::Index pick = -1;
    for (auto r = ds.row_offset[t]; r < ds.row_offset[t + 1]; ++r) {
      const double u = utility_row_offsetless(r - row_begin) + rng.gumbel();
      if (ds.available[r] && u > best) {
        best = u;
        pick = r;
      }
    }
    ds.chosen_row[t] = pick;
  }
}

}  // namespace

QuadrantSample simulate_quadrant(const QuadrantDesign& design, const TaskSource& tasks) {
  const double total = std::accumulate(design.proportions.begin(), design.proportions.end(), 0.0);
  for (double p : design.proportions)
    if (p < 0) throw std::invalid_argument("proportions must be non-negative");
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("proportions must sum to 1");
  if (design.n_individuals < 1 || design.n_tasks < 1) throw std::invalid_argument("need at least one individual and task");
  if (tasks.n_alternatives < 2 || tasks.price_levels.empty() || tasks.quality_levels.empty())
    throw std::invalid_argument("task source needs two alternatives and non-empty level lists");

  Rng rng(design.seed);
  QuadrantSample out;
  const auto counts = allocate_counts(design.proportions, design.n_individuals);
  std::copy(counts.begin(), counts.end(), out.counts.begin());
  std::vector<Quadrant> assignment;
  for (int q = 0; q < 4; ++q) assignment.insert(assignment.end(), static_cast<std::size_t>(counts[q]), static_cast<Quadrant>(q));
  for (std::size_t i = assignment.size(); i > 1; --i) std::swap(assignment[i - 1], assignment[rng.index(i)]);

  out.dataset = make_regular_dataset(design.n_individuals, design.n_tasks, tasks.n_alternatives, {"price", "quality"}, {});
  ChoiceDataset& ds = out.dataset;
  Eigen::VectorXd sens_cost(design.n_individuals), sens_quality(design.n_individuals);
  Eigen::VectorXd coef_price(design.n_individuals), coef_quality(design.n_individuals);
  for (Eigen::Index n = 0; n < design.n_individuals; ++n) {
    const Quadrant q = assignment[static_cast<std::size_t>(n)];
    const bool cost = q == Quadrant::BothSensitive || q == Quadrant::CostOnly;
    const bool quality = q == Quadrant::BothSensitive || q == Quadrant::QualityOnly;
    TruePreference tp;
    tp.id = ds.individual_ids[n];
    tp.quadrant = q;
    tp.price = (cost ? design.price_sensitive : design.price_insensitive) + design.jitter * rng.normal();
    tp.quality = (quality ? design.quality_sensitive : design.quality_insensitive) + design.jitter * rng.normal();
    sens_cost(n) = cost;
    sens_quality(n) = quality;
    coef_price(n) = tp.price;
    coef_quality(n) = tp.quality;

    const Eigen::Index r0 = ds.row_offset[ds.task_offset[n]];
    const Eigen::Index r1 = ds.row_offset[ds.task_offset[n + 1]];
    for (Eigen::Index r = r0; r < r1; ++r) {
      ds.attributes(r, 0) = tasks.price_levels[rng.index(tasks.price_levels.size())];
      ds.attributes(r, 1) = tasks.quality_levels[rng.index(tasks.quality_levels.size())];
    }
    const Eigen::VectorXd v = ds.attributes.middleRows(r0, r1 - r0) * Eigen::Vector2d(tp.price, tp.quality);
    draw_choices(ds, n, v, r0, rng);
    out.truth.push_back(tp);
  }
  out.coefficient_correlation = pearson_correlation(coef_price, coef_quality);
  out.sensitivity_correlation = pearson_correlation(sens_cost, sens_quality);
  validate(ds);
  return out;
}

QuadrantDesign quadrant_preset(const std::string& name) {
  QuadrantDesign d;
  if (name == "table1-dataset1") {
    d.proportions = {0.25, 0.25, 0.25, 0.25};
  } else if (name == "table1-dataset2") {
    d.proportions = {0.0, 0.0, 0.5, 0.5};
  } else if (name == "table1-dataset3") {
    d.proportions = {0.05, 0.05, 0.45, 0.45};
  } else if (name == "visual-10") {
    d.proportions = {0.25, 0.25, 0.25, 0.25};
    d.n_individuals = 10;
    d.n_tasks = 50;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return d;
}

ModelSample simulate_from_model(const ChoiceDataset& design, const Model& model,
                                const Eigen::VectorXd& theta, std::uint64_t seed) {
  ModelSample out{design, {}};
  ChoiceDataset& ds = out.dataset;
  Rng rng(seed);
  const Eigen::MatrixXd B = model.coefficient_matrix(theta);
  for (Eigen::Index n = 0; n < ds.n_individuals(); ++n) {
    const Eigen::VectorXd prior = exp_of(log_prior_shares(model, theta, n));
    const double u = rng.uniform();
    Eigen::Index m = 0;
    double acc = prior(0);
    while (m + 1 < prior.size() && u >= acc) acc += prior(++m);
    out.mixture.push_back(m);
    const Eigen::Index r0 = ds.row_offset[ds.task_offset[n]];
    const Eigen::Index r1 = ds.row_offset[ds.task_offset[n + 1]];
    const Eigen::VectorXd v = model.design.middleRows(r0, r1 - r0) * B.col(m);
    draw_choices(ds, n, v, r0, rng);
  }
  validate(ds);
  return out;
}

ChoiceDataset random_design(const DesignShape& shape, std::uint64_t seed) {
  ChoiceDataset ds = make_regular_dataset(shape.n_individuals, shape.n_tasks, shape.n_alternatives,
                                          shape.attributes, shape.socios);
  Rng rng(seed);
  for (Eigen::Index r = 0; r < ds.attributes.rows(); ++r)
    for (Eigen::Index k = 0; k < ds.attributes.cols(); ++k) ds.attributes(r, k) = rng.normal();
  for (Eigen::Index n = 0; n < ds.socios.rows(); ++n)
    for (Eigen::Index l = 0; l < ds.socios.cols(); ++l) ds.socios(n, l) = rng.uniform() < 0.5 ? 0.0 : 1.0;
  return ds;
}

void write_truth(const std::vector<TruePreference>& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write truth file '" + path.string() + "'");
  out << "id,price,quality,quadrant,cost_sensitive,quality_sensitive\n";
  for (const auto& t : truth) {
    const bool cost = t.quadrant == Quadrant::BothSensitive || t.quadrant == Quadrant::CostOnly;
    const bool quality = t.quadrant == Quadrant::BothSensitive || t.quadrant == Quadrant::QualityOnly;
    out << t.id << ',' << format_decimal(t.price) << ',' << format_decimal(t.quality) << ','
        << to_string(t.quadrant) << ',' << (cost ? 1 : 0) << ',' << (quality ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("error writing truth file '" + path.string() + "'");
}

}  // namespace gdm
