#include "gdm/cli.hpp"

#include "gdm/config.hpp"
#include "gdm/data.hpp"
#include "gdm/estimate.hpp"
#include "gdm/posterior.hpp"
#include "gdm/report.hpp"
#include "gdm/simulate.hpp"
#include "gdm/spec.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

namespace gdm::cli {

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string config;
  std::optional<long long> seed;
  int threads = 1;
  std::string out = ".";
};

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

fs::path resolve(const fs::path& base, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : base / p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

ColumnSchema read_schema(const Config& cfg) {
  ColumnSchema s;
  s.id = cfg.get("data", "id").value_or(s.id);
  s.task = cfg.get("data", "task").value_or(s.task);
  s.alternative = cfg.get("data", "alt").value_or(s.alternative);
  s.choice = cfg.get("data", "choice").value_or(s.choice);
  s.availability = cfg.get("data", "avail").value_or("");
  s.attributes = cfg.get_list("data", "attributes");
  s.socios = cfg.get_list("data", "socios");
  return s;
}

UtilitySpec read_utility(const Config& cfg) {
  UtilitySpec u;
  for (const auto& key : cfg.keys("utility")) {
    const std::string value = *cfg.get("utility", key);
    if (starts_with(value, "asc:"))
      u.constants.push_back({key, value.substr(4)});
    else
      u.terms.push_back({key, value});
  }
  if (u.terms.empty() && u.constants.empty()) throw ConfigError("[utility] defines no coefficients");
  return u;
}

HeterogeneitySpec read_heterogeneity(const Config& cfg) {
  HeterogeneitySpec h;
  if (!cfg.has_section("heterogeneity")) return h;
  h.family = parse_family(cfg.get("heterogeneity", "family").value_or("MNL"));
  const int default_q = static_cast<int>(cfg.get_int("heterogeneity", "supports", 2));
  h.socio_links = cfg.get_list("heterogeneity", "socios");
  std::map<std::string, int> supports;
  for (const auto& key : cfg.keys("heterogeneity")) {
    if (starts_with(key, "block.")) {
      h.blocks.push_back({key.substr(6), cfg.get_list("heterogeneity", key), default_q});
    } else if (starts_with(key, "supports.")) {
      supports[key.substr(9)] = static_cast<int>(cfg.get_int("heterogeneity", key, default_q));
    } else if (starts_with(key, "boost.")) {
      h.boosts.push_back({key.substr(6), BoostPredicate::parse(*cfg.get("heterogeneity", key))});
    } else if (starts_with(key, "fix.")) {
      h.fixes.push_back({key.substr(4), cfg.get_double("heterogeneity", key, 0.0)});
    }
  }
  for (const auto& [name, q] : supports) {
    auto it = std::find_if(h.blocks.begin(), h.blocks.end(), [&](const Block& b) { return b.name == name; });
    if (it == h.blocks.end()) throw ConfigError("supports." + name + " refers to an undefined block");
    it->supports = q;
  }
  return h;
}

int cmd_simulate(const CommonFlags& flags, std::ostream& out) {
  const Config cfg = Config::load(flags.config);
  const fs::path base = fs::path(flags.config).parent_path();
  const fs::path dir(flags.out);
  const std::string type = cfg.get("design", "type").value_or("quadrant");
  if (type == "quadrant") {
    QuadrantDesign design;
    if (const auto preset = cfg.get("design", "preset")) design = quadrant_preset(*preset);
    const auto props = cfg.get_doubles("design", "proportions");
    if (!props.empty()) {
      if (props.size() != 4) throw ConfigError("[design] proportions needs four values");
      double sum = 0;
      for (double p : props) {
        if (p < 0) throw ConfigError("[design] proportions must be non-negative");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("[design] proportions must sum to 1 (got " + std::to_string(sum) + ")");
      std::copy(props.begin(), props.end(), design.proportions.begin());
    }
    design.n_individuals = cfg.get_int("design", "n_individuals", design.n_individuals);
    design.n_tasks = cfg.get_int("design", "n_tasks", design.n_tasks);
    design.jitter = cfg.get_double("design", "jitter", design.jitter);
    design.seed = static_cast<std::uint64_t>(cfg.get_int("design", "seed", static_cast<long long>(design.seed)));
    if (const auto p = cfg.get_doubles("design", "price_support"); !p.empty()) {
      if (p.size() != 2) throw ConfigError("[design] price_support needs insensitive, sensitive values");
      design.price_insensitive = p[0];
      design.price_sensitive = p[1];
    }
    if (const auto q = cfg.get_doubles("design", "quality_support"); !q.empty()) {
      if (q.size() != 2) throw ConfigError("[design] quality_support needs insensitive, sensitive values");
      design.quality_insensitive = q[0];
      design.quality_sensitive = q[1];
    }
    TaskSource tasks;
    tasks.n_alternatives = cfg.get_int("design", "n_alternatives", tasks.n_alternatives);
    if (auto v = cfg.get_doubles("design", "price_levels"); !v.empty()) tasks.price_levels = v;
    if (auto v = cfg.get_doubles("design", "quality_levels"); !v.empty()) tasks.quality_levels = v;
    cfg.reject_unused({"design"});
    if (flags.seed) design.seed = static_cast<std::uint64_t>(*flags.seed);
    if (design.n_individuals < 1 || design.n_tasks < 1) throw ConfigError("[design] n_individuals and n_tasks must be >= 1");

    const QuadrantSample sample = simulate_quadrant(design, tasks);
    ensure_dir(dir);
    write_dataset(sample.dataset, dir / "dataset.csv");
    write_truth(sample.truth, dir / "truth.csv");
    out << "individuals             " << sample.dataset.n_individuals() << "\n";
    out << "tasks                   " << sample.dataset.n_tasks() << "\n";
    out << "rows                    " << sample.dataset.n_rows() << "\n";
    for (int q = 0; q < 4; ++q)
      out << "quadrant " << to_string(static_cast<Quadrant>(q)) << std::string(15 - std::min<std::size_t>(15, to_string(static_cast<Quadrant>(q)).size()), ' ')
          << sample.counts[q] << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", sample.coefficient_correlation);
    out << "coefficient_correlation " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.4f", sample.sensitivity_correlation);
    out << "sensitivity_correlation " << buf << "\n";
    out << "dataset_hash            " << hash_hex(content_hash(sample.dataset)) << "\n";
    return kSuccess;
  }
  if (type == "model") {
    DesignShape shape;
    shape.n_individuals = cfg.get_int("design", "n_individuals", shape.n_individuals);
    shape.n_tasks = cfg.get_int("design", "n_tasks", shape.n_tasks);
    shape.n_alternatives = cfg.get_int("design", "n_alternatives", shape.n_alternatives);
    if (auto a = cfg.get_list("design", "attributes"); !a.empty()) shape.attributes = a;
    shape.socios = cfg.get_list("design", "socios");
    auto seed = static_cast<std::uint64_t>(cfg.get_int("design", "seed", 1));
    if (flags.seed) seed = static_cast<std::uint64_t>(*flags.seed);
    const UtilitySpec u = read_utility(cfg);
    const HeterogeneitySpec h = read_heterogeneity(cfg);
    const ChoiceDataset design = random_design(shape, seed);
    const Model model = compile_spec(u, h, design);
    ParameterSet params = model.initial;
    for (const auto& key : cfg.keys("parameters")) params.values(params.index(key)) = cfg.get_double("parameters", key, 0.0);
    cfg.reject_unused({"design", "utility", "heterogeneity", "parameters"});
    const ModelSample sample = simulate_from_model(design, model, params.values, seed + 1);
    ensure_dir(dir);
    write_dataset(sample.dataset, dir / "dataset.csv");
    std::string mixtures = "id,mixture\n";
    for (Eigen::Index n = 0; n < sample.dataset.n_individuals(); ++n)
      mixtures += sample.dataset.individual_ids[n] + "," + std::to_string(sample.mixture[n] + 1) + "\n";
    write_text(dir / "mixtures.csv", mixtures);
    out << "individuals             " << sample.dataset.n_individuals() << "\n";
    out << "tasks                   " << sample.dataset.n_tasks() << "\n";
    out << "mixtures                " << model.n_mixtures() << "\n";
    out << "dataset_hash            " << hash_hex(content_hash(sample.dataset)) << "\n";
    return kSuccess;
  }
  throw ConfigError("[design] type must be 'quadrant' or 'model'");
}

int cmd_estimate(const CommonFlags& flags, std::ostream& out) {
  const Config cfg = Config::load(flags.config);
  const fs::path base = fs::path(flags.config).parent_path();
  const fs::path data_path = resolve(base, cfg.require("data", "path"));
  const ColumnSchema schema = read_schema(cfg);
  const UtilitySpec u = read_utility(cfg);
  const HeterogeneitySpec h = read_heterogeneity(cfg);
  FitOptions options;
  options.starts = static_cast<int>(cfg.get_int("options", "starts", options.starts));
  options.seed = static_cast<std::uint64_t>(cfg.get_int("options", "seed", static_cast<long long>(options.seed)));
  options.tolerance = cfg.get_double("options", "tolerance", options.tolerance);
  options.max_iterations = static_cast<int>(cfg.get_int("options", "max_iterations", options.max_iterations));
  options.label = cfg.get("options", "label").value_or(to_string(h.family));
  const auto cap = cfg.get_int("options", "mixture_cap", default_mixture_cap);
  const auto start_from = cfg.get_list("options", "start_from");
  cfg.reject_unused({"data", "utility", "heterogeneity", "options"});
  if (flags.seed) options.seed = static_cast<std::uint64_t>(*flags.seed);
  options.threads = flags.threads;
  if (options.starts < 1) throw ConfigError("[options] starts must be >= 1");

  const ChoiceDataset ds = load_dataset(data_path, schema);
  const Model model = compile_spec(u, h, ds, cap);
  for (const auto& path : start_from) options.extra_starts.push_back(read_result(resolve(base, path)).params);

  const EstimationResult result = fit(ds, model, options);
  const fs::path dir(flags.out);
  ensure_dir(dir);
  write_text(dir / (result.label + ".json"), result_to_json(result, cfg.text()).dump(2) + "\n");
  write_text(dir / (result.label + ".txt"), format_report(result));
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s: LL %.4f, BIC %.4f, %lld free parameters, %s\n", result.label.c_str(), result.ll,
                result.bic, static_cast<long long>(result.n_free), to_string(result.status).c_str());
  out << buf;
  return result.converged ? kSuccess : kNotConverged;
}

int cmd_compare(const std::vector<std::string>& paths, const CommonFlags& flags, std::ostream& out) {
  if (paths.empty()) throw ConfigError("compare needs at least one result file");
  std::vector<EstimationResult> results;
  for (const auto& p : paths) {
    results.push_back(read_result(p));
    if (results.back().dataset_hash != results.front().dataset_hash)
      throw ConfigError("results '" + paths.front() + "' (dataset " + results.front().dataset_hash + ") and '" + p +
                        "' (dataset " + results.back().dataset_hash + ") come from different datasets");
  }
  const ComparisonTable table = compare(results);
  const fs::path dir(flags.out);
  ensure_dir(dir);
  write_text(dir / "comparison.csv", comparison_csv(table));
  const std::string text = format_comparison(table);
  write_text(dir / "comparison.txt", text);
  out << text;
  const auto find = [&](Family f) -> const EstimationResult* {
    for (const auto& r : results)
      if (r.family() == f) return &r;
    return nullptr;
  };
  if (const auto* dm = find(Family::DM); dm)
    if (const auto* lc = find(Family::LC); lc) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "difference in LL (DM - LC): %.2f\n", dm->ll - lc->ll);
      out << buf;
    }
  return kSuccess;
}

int cmd_export(const std::string& result_path, const std::string& data_path, const std::string& truth_path,
               const std::vector<std::string>& coefs, const CommonFlags& flags, std::ostream& out) {
  const EstimationResult result = read_result(result_path);
  ColumnSchema schema;
  {
    // Reuse the column roles from the echoed run config when present.
    const std::string echo = nlohmann::json::parse(std::ifstream(result_path)).value("config", std::string());
    const Config cfg = Config::parse(echo);
    if (cfg.has_section("data")) schema = read_schema(cfg);
    else schema.availability = "avail";
  }
  const ChoiceDataset ds = load_dataset(data_path, schema);
  if (hash_hex(content_hash(ds)) != result.dataset_hash)
    throw ConfigError("dataset '" + data_path + "' does not match the dataset of result '" + result_path + "'");
  const Model model = compile_spec(result.utility, result.heterogeneity, ds, std::max<Eigen::Index>(result.mixtures, 1));
  const Eigen::VectorXd theta = transfer_parameters(result.params, model).values;

  std::vector<std::string> names = coefs;
  if (names.empty()) {
    names = model.coefficients;
    if (names.size() > 2) names.resize(2);
  }
  std::vector<Eigen::Index> rows;
  for (const auto& n : names) {
    const auto it = std::find(model.coefficients.begin(), model.coefficients.end(), n);
    if (it == model.coefficients.end()) throw ConfigError("coefficient '" + n + "' is not in the model");
    rows.push_back(it - model.coefficients.begin());
  }
  const Eigen::MatrixXd B = model.coefficient_matrix(theta);
  Eigen::VectorXd mean_share = Eigen::VectorXd::Zero(model.n_mixtures());
  for (Eigen::Index n = 0; n < ds.n_individuals(); ++n)
    mean_share += exp_of(log_prior_shares(model, theta, n));
  mean_share /= static_cast<double>(ds.n_individuals());

  std::vector<std::pair<std::vector<double>, double>> grid;
  for (Eigen::Index m = 0; m < model.n_mixtures(); ++m) {
    std::vector<double> point;
    for (auto r : rows) point.push_back(B(r, m));
    auto it = std::find_if(grid.begin(), grid.end(), [&](const auto& g) { return g.first == point; });
    if (it == grid.end())
      grid.emplace_back(point, mean_share(m));
    else
      it->second += mean_share(m);
  }
  std::string grid_csv = "point";
  for (const auto& n : names) grid_csv += "," + n;
  grid_csv += ",share\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    grid_csv += std::to_string(g + 1);
    for (double v : grid[g].first) grid_csv += "," + format_decimal(v);
    grid_csv += "," + format_decimal(grid[g].second) + "\n";
  }
  const fs::path dir(flags.out);
  ensure_dir(dir);
  write_text(dir / "grid.csv", grid_csv);
  std::optional<TruthTable> truth;
  if (!truth_path.empty()) truth = TruthTable::load(truth_path);
  write_text(dir / "individuals.csv", format_diagnostics(individual_diagnostics(ds, model, theta, truth)));
  out << "grid points             " << grid.size() << "\n";
  out << "individuals             " << ds.n_individuals() << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete choice estimation: MNL, latent class, discrete mixture and generalised discrete mixture"};
  app.require_subcommand(1);
  CommonFlags flags;
  long long seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", flags.config, "run configuration file")->required();
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--threads", flags.threads, "worker threads for likelihood evaluation")->check(CLI::PositiveNumber);
    sub->add_option("--out", flags.out, "output directory");
  };
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  add_common(simulate, true);
  auto* estimate = app.add_subcommand("estimate", "fit a model");
  add_common(estimate, true);
  auto* comp = app.add_subcommand("compare", "compare fitted models");
  std::vector<std::string> result_paths;
  comp->add_option("results", result_paths, "result files")->required();
  add_common(comp, false);
  auto* exp = app.add_subcommand("export-plotdata", "export estimate grid and per-individual diagnostics");
  std::string export_result, export_data;
  std::string coef_list, truth_file;
  exp->add_option("result", export_result, "result file")->required();
  exp->add_option("dataset", export_data, "dataset file")->required();
  exp->add_option("--coefs", coef_list, "comma-separated coefficient names for the grid");
  exp->add_option("--truth", truth_file, "true-preference file for recovery error columns");
  add_common(exp, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  }
  for (auto* sub : {simulate, estimate, comp, exp})
    if (sub->count("--seed")) flags.seed = seed;

  try {
    if (*simulate) return cmd_simulate(flags, out);
    if (*estimate) return cmd_estimate(flags, out);
    if (*comp) return cmd_compare(result_paths, flags, out);
    if (*exp) return cmd_export(export_result, export_data, truth_file, split_list(coef_list), flags, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed result file: " << e.what() << "\n";
    return kValidationError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const MixtureCapError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace gdm::cli
