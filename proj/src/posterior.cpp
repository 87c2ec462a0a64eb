#include "gdm/posterior.hpp"

#include "gdm/numeric.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace gdm {

Eigen::MatrixXd posterior_shares(const ChoiceDataset& ds, const Model& model, const Eigen::VectorXd& theta) {
  const Eigen::Index N = ds.n_individuals();
  Eigen::MatrixXd out(N, model.n_mixtures());
  for (Eigen::Index n = 0; n < N; ++n) {
    const IndividualTerms terms = individual_terms(ds, model, theta, n);
    Eigen::VectorXd joint = terms.log_prior + terms.panel_loglik;
    log_normalize(joint);
    out.row(n) = exp_of(joint).transpose();
  }
  return out;
}

TruthTable TruthTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open truth file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("truth file '" + path.string() + "' is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      f.push_back(cell);
    }
    return f;
  };
  const auto header = split(line);
  if (header.empty() || header.front() != "id") throw DataError("truth file must start with an 'id' column");
  TruthTable t;
  std::vector<std::size_t> numeric_cols;
  // Numeric columns are those whose first data cell parses as a number.
  std::vector<std::vector<std::string>> cells;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    cells.push_back(split(line));
  }
  if (cells.empty()) return t;
  for (std::size_t j = 1; j < header.size(); ++j) {
    try {
      std::size_t used = 0;
      const std::string& c = cells.front().at(j);
      std::stod(c, &used);
      if (used == c.size()) numeric_cols.push_back(j);
    } catch (const std::exception&) {
    }
  }
  for (auto j : numeric_cols) t.columns.push_back(header[j]);
  for (const auto& row : cells) {
    if (row.size() != header.size()) throw DataError("truth file row has wrong number of fields");
    std::vector<double> values;
    for (auto j : numeric_cols) values.push_back(std::stod(row[j]));
    t.rows[row[0]] = std::move(values);
  }
  return t;
}

DiagnosticsTable individual_diagnostics(const ChoiceDataset& ds, const Model& model, const Eigen::VectorXd& theta,
                                        const std::optional<TruthTable>& truth) {
  DiagnosticsTable out;
  out.ids = ds.individual_ids;
  const Eigen::Index N = ds.n_individuals();
  const Eigen::MatrixXd post = posterior_shares(ds, model, theta);
  out.loglik = total_loglik(ds, model, theta).per_individual;
  out.modal_mixture.resize(static_cast<std::size_t>(N));
  for (Eigen::Index n = 0; n < N; ++n) post.row(n).maxCoeff(&out.modal_mixture[n]);

  std::vector<Eigen::Index> chosen;
  for (std::size_t c = 0; c < model.coefficients.size(); ++c)
    if (model.family() == Family::MNL || model.coefficient_block[c] >= 0) chosen.push_back(static_cast<Eigen::Index>(c));
  const Eigen::MatrixXd B = model.coefficient_matrix(theta);
  out.posterior_mean.resize(N, static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    out.coefficients.push_back(model.coefficients[chosen[j]]);
    out.posterior_mean.col(static_cast<Eigen::Index>(j)) = post * B.row(chosen[j]).transpose();
  }

  if (truth) {
    for (const auto& id : ds.individual_ids)
      if (!truth->rows.count(id)) throw DataError("truth table has no row for individual '" + id + "'");
    if (truth->rows.size() != ds.individual_ids.size())
      throw DataError("truth table individual ids do not match the dataset");
    const auto C = static_cast<Eigen::Index>(chosen.size());
    out.truth = Eigen::MatrixXd::Constant(N, C, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index j = 0; j < C; ++j) {
      const std::string& coef = model.coefficients[chosen[j]];
      std::string attr;
      for (const auto& term : model.utility.terms)
        if (term.coefficient == coef) attr = term.attribute;
      auto col = std::find(truth->columns.begin(), truth->columns.end(), coef);
      if (col == truth->columns.end()) col = std::find(truth->columns.begin(), truth->columns.end(), attr);
      if (col == truth->columns.end()) continue;
      const auto tj = static_cast<std::size_t>(col - truth->columns.begin());
      for (Eigen::Index n = 0; n < N; ++n) out.truth(n, j) = truth->rows.at(ds.individual_ids[n])[tj];
    }
    out.error = out.posterior_mean - out.truth;
  }
  return out;
}

std::string format_diagnostics(const DiagnosticsTable& t) {
  std::string out = "id,ll,modal_mixture";
  for (const auto& c : t.coefficients) out += ",post_" + c;
  const bool with_truth = t.truth.size() > 0;
  if (with_truth)
    for (const auto& c : t.coefficients) out += ",true_" + c + ",err_" + c;
  out += '\n';
  for (std::size_t n = 0; n < t.ids.size(); ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    out += t.ids[n] + ',' + format_decimal(t.loglik(i)) + ',' + std::to_string(t.modal_mixture[n] + 1);
    for (Eigen::Index j = 0; j < t.posterior_mean.cols(); ++j) out += ',' + format_decimal(t.posterior_mean(i, j));
    if (with_truth) {
      for (Eigen::Index j = 0; j < t.truth.cols(); ++j) {
        const bool known = !std::isnan(t.truth(i, j));
        out += ',' + (known ? format_decimal(t.truth(i, j)) : std::string());
        out += ',' + (known ? format_decimal(t.error(i, j)) : std::string());
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace gdm
