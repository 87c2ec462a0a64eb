#include "gdm/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace gdm {

namespace {

using ojson = nlohmann::ordered_json;

ojson number_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string rpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

nlohmann::ordered_json result_to_json(const EstimationResult& r, const std::string& config_echo) {
  ojson doc;
  doc["format"] = "gdm-result/1";
  doc["label"] = r.label;
  doc["family"] = to_string(r.family());
  doc["dataset_hash"] = r.dataset_hash;
  doc["n_individuals"] = r.n_individuals;
  doc["n_obs"] = r.n_obs;
  doc["n_free"] = r.n_free;
  doc["ll"] = r.ll;
  doc["ll0"] = r.ll0;
  doc["aic"] = r.aic;
  doc["bic"] = r.bic;
  doc["status"] = to_string(r.status);
  doc["converged"] = r.converged;
  doc["iterations"] = r.iterations;
  doc["gradient_max"] = r.gradient_max;
  doc["hessian_min_eigenvalue"] = number_or_null(r.hessian_min_eigenvalue);
  doc["boundary"] = r.boundary;
  doc["supports"] = r.supports;
  doc["mixtures"] = r.mixtures;

  ojson utility;
  utility["terms"] = ojson::array();
  for (const auto& t : r.utility.terms) utility["terms"].push_back({{"coefficient", t.coefficient}, {"attribute", t.attribute}});
  utility["constants"] = ojson::array();
  for (const auto& c : r.utility.constants)
    utility["constants"].push_back({{"coefficient", c.coefficient}, {"alternative", c.alternative}});
  doc["utility"] = utility;

  ojson het;
  het["family"] = to_string(r.heterogeneity.family);
  het["blocks"] = ojson::array();
  for (const auto& b : r.heterogeneity.blocks)
    het["blocks"].push_back({{"name", b.name}, {"coefficients", b.coefficients}, {"supports", b.supports}});
  het["boosts"] = ojson::array();
  for (const auto& b : r.heterogeneity.boosts)
    het["boosts"].push_back({{"name", b.name}, {"predicate", b.predicate.to_string()}});
  het["socio_links"] = r.heterogeneity.socio_links;
  het["fixes"] = ojson::array();
  for (const auto& f : r.heterogeneity.fixes) het["fixes"].push_back({{"parameter", f.parameter}, {"value", f.value}});
  doc["heterogeneity"] = het;

  doc["parameters"] = ojson::array();
  for (Eigen::Index i = 0; i < r.params.size(); ++i) {
    const auto& se = r.standard_errors.size() > static_cast<std::size_t>(i) ? r.standard_errors[i] : std::nullopt;
    doc["parameters"].push_back({{"name", r.params.names[i]},
                                 {"value", r.params.values(i)},
                                 {"free", static_cast<bool>(r.params.free[i])},
                                 {"se", se ? ojson(*se) : ojson(nullptr)}});
  }
  doc["covariance"] = ojson::array();
  for (Eigen::Index a = 0; a < r.covariance.rows(); ++a) {
    ojson row = ojson::array();
    for (Eigen::Index b = 0; b < r.covariance.cols(); ++b) row.push_back(number_or_null(r.covariance(a, b)));
    doc["covariance"].push_back(row);
  }
  doc["multistart"] = ojson::array();
  for (const auto& m : r.multistart)
    doc["multistart"].push_back({{"start", m.start},
                                 {"origin", m.origin},
                                 {"ll", number_or_null(m.ll)},
                                 {"iterations", m.iterations},
                                 {"converged", m.converged}});
  doc["config"] = config_echo;
  return doc;
}

EstimationResult result_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "gdm-result/1") throw std::invalid_argument("not a result document");
  EstimationResult r;
  r.label = doc.at("label").get<std::string>();
  r.dataset_hash = doc.at("dataset_hash").get<std::string>();
  r.n_individuals = doc.at("n_individuals").get<Eigen::Index>();
  r.n_obs = doc.at("n_obs").get<Eigen::Index>();
  r.n_free = doc.at("n_free").get<Eigen::Index>();
  r.ll = doc.at("ll").get<double>();
  r.ll0 = doc.at("ll0").get<double>();
  r.aic = doc.at("aic").get<double>();
  r.bic = doc.at("bic").get<double>();
  r.status = parse_fit_status(doc.at("status").get<std::string>());
  r.converged = doc.at("converged").get<bool>();
  r.iterations = doc.at("iterations").get<int>();
  r.gradient_max = doc.at("gradient_max").get<double>();
  const auto& eig = doc.at("hessian_min_eigenvalue");
  r.hessian_min_eigenvalue = eig.is_null() ? std::nan("") : eig.get<double>();
  r.boundary = doc.at("boundary").get<std::vector<std::string>>();
  r.supports = doc.at("supports").get<std::vector<int>>();
  r.mixtures = doc.at("mixtures").get<Eigen::Index>();
  for (const auto& t : doc.at("utility").at("terms"))
    r.utility.terms.push_back({t.at("coefficient").get<std::string>(), t.at("attribute").get<std::string>()});
  for (const auto& c : doc.at("utility").at("constants"))
    r.utility.constants.push_back({c.at("coefficient").get<std::string>(), c.at("alternative").get<std::string>()});
  const auto& het = doc.at("heterogeneity");
  r.heterogeneity.family = parse_family(het.at("family").get<std::string>());
  for (const auto& b : het.at("blocks"))
    r.heterogeneity.blocks.push_back({b.at("name").get<std::string>(), b.at("coefficients").get<std::vector<std::string>>(),
                                      b.at("supports").get<int>()});
  for (const auto& b : het.at("boosts"))
    r.heterogeneity.boosts.push_back({b.at("name").get<std::string>(), BoostPredicate::parse(b.at("predicate").get<std::string>())});
  r.heterogeneity.socio_links = het.at("socio_links").get<std::vector<std::string>>();
  for (const auto& f : het.at("fixes"))
    r.heterogeneity.fixes.push_back({f.at("parameter").get<std::string>(), f.at("value").get<double>()});
  const auto& params = doc.at("parameters");
  std::vector<double> values;
  for (const auto& p : params) {
    r.params.names.push_back(p.at("name").get<std::string>());
    values.push_back(p.at("value").get<double>());
    r.params.free.push_back(p.at("free").get<bool>());
    const auto& se = p.at("se");
    r.standard_errors.push_back(se.is_null() ? std::nullopt : std::optional<double>(se.get<double>()));
  }
  r.params.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  const auto& cov = doc.at("covariance");
  if (!cov.empty()) {
    const auto F = static_cast<Eigen::Index>(cov.size());
    r.covariance.resize(F, F);
    for (Eigen::Index a = 0; a < F; ++a)
      for (Eigen::Index b = 0; b < F; ++b) {
        const auto& v = cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        r.covariance(a, b) = v.is_null() ? std::nan("") : v.get<double>();
      }
  }
  for (const auto& m : doc.at("multistart"))
    r.multistart.push_back({m.at("start").get<int>(), m.at("origin").get<std::string>(),
                            m.at("ll").is_null() ? std::nan("") : m.at("ll").get<double>(),
                            m.at("iterations").get<int>(), m.at("converged").get<bool>()});
  return r;
}

EstimationResult read_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open result file '" + path.string() + "'");
  return result_from_json(nlohmann::json::parse(in));
}

std::string format_report(const EstimationResult& r) {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += pad(k, 24) + v + '\n'; };
  kv("label", r.label);
  kv("family", to_string(r.family()));
  kv("dataset_hash", r.dataset_hash);
  kv("individuals", std::to_string(r.n_individuals));
  kv("observations", std::to_string(r.n_obs));
  kv("free_parameters", std::to_string(r.n_free));
  kv("mixtures", std::to_string(r.mixtures));
  kv("ll", fixed(r.ll, 4));
  kv("ll0", fixed(r.ll0, 4));
  kv("aic", fixed(r.aic, 4));
  kv("bic", fixed(r.bic, 4));
  kv("status", to_string(r.status));
  kv("iterations", std::to_string(r.iterations));
  kv("gradient_max", fixed(r.gradient_max, 10));
  kv("hessian_min_eigenvalue", std::isfinite(r.hessian_min_eigenvalue) ? fixed(r.hessian_min_eigenvalue, 6) : "NA");
  if (!r.boundary.empty()) {
    std::string b;
    for (const auto& n : r.boundary) b += (b.empty() ? "" : ", ") + n;
    kv("boundary", b);
  }
  for (const auto& boost : r.heterogeneity.boosts) kv("boost " + boost.name, boost.predicate.to_string());
  out += "\n" + pad("parameter", 32) + rpad("estimate", 14) + rpad("se", 14) + rpad("t", 10) + "\n";
  for (Eigen::Index i = 0; i < r.params.size(); ++i) {
    const auto& se = r.standard_errors[static_cast<std::size_t>(i)];
    std::string se_text = r.params.free[i] ? (se ? fixed(*se, 6) : "NA") : "fixed";
    std::string t_text = se && *se > 0 ? fixed(r.params.values(i) / *se, 2) : "";
    out += pad(r.params.names[i], 32) + rpad(fixed(r.params.values(i), 6), 14) + rpad(se_text, 14) + rpad(t_text, 10) + "\n";
  }
  out += "\n" + pad("start", 8) + pad("origin", 10) + rpad("ll", 16) + rpad("iterations", 12) + "  converged\n";
  for (const auto& m : r.multistart)
    out += pad(std::to_string(m.start), 8) + pad(m.origin, 10) + rpad(fixed(m.ll, 4), 16) +
           rpad(std::to_string(m.iterations), 12) + (m.converged ? "  yes" : "  no") + "\n";
  return out;
}

std::string format_comparison(const ComparisonTable& t) {
  std::string out = pad("model", 20) + pad("family", 8) + rpad("pars", 6) + rpad("supports", 10) + rpad("groups", 8) +
                    rpad("mixtures", 10) + rpad("LL", 16) + rpad("BIC", 16) + rpad("dLL", 12) + rpad("LL rank", 9) + "\n";
  for (const auto& r : t.rows)
    out += pad(r.label, 20) + pad(r.family, 8) + rpad(std::to_string(r.n_free), 6) + rpad(r.supports, 10) +
           rpad(std::to_string(r.groups), 8) + rpad(std::to_string(r.mixtures), 10) + rpad(fixed(r.ll, 2), 16) +
           rpad(fixed(r.bic, 2), 16) + rpad(fixed(r.delta_ll, 2), 12) + rpad(std::to_string(r.ll_rank), 9) + "\n";
  return out;
}

std::string comparison_csv(const ComparisonTable& t) {
  std::string out = "model,family,pars,supports,groups,mixtures,ll,bic,delta_ll,ll_rank\n";
  for (const auto& r : t.rows)
    out += r.label + ',' + r.family + ',' + std::to_string(r.n_free) + ',' + r.supports + ',' + std::to_string(r.groups) +
           ',' + std::to_string(r.mixtures) + ',' + fixed(r.ll, 6) + ',' + fixed(r.bic, 6) + ',' + fixed(r.delta_ll, 6) +
           ',' + std::to_string(r.ll_rank) + '\n';
  return out;
}

}  // namespace gdm
