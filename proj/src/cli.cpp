#include "ssvb/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "ssvb/collapsed_vb.hpp"
#include "ssvb/experiments.hpp"
#include "ssvb/linear_vb.hpp"
#include "ssvb/logistic_vb.hpp"
#include "ssvb/oracle.hpp"
#include "ssvb/quantile_vb.hpp"
#include "ssvb/tabular.hpp"

namespace ssvb::cli {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Oracle reports list per-model probabilities only up to this size.
constexpr std::size_t kMaxListedModelsP = 12;

struct HyperFlags {
  double v0 = 0.01;
  double v1 = 100.0;
  double a = 0.5;
  double b = 0.5;
  double rho = 0.5;

  void attach(CLI::App* app) {
    app->add_option("--v0", v0, "spike variance")->capture_default_str();
    app->add_option("--v1", v1, "slab variance")->capture_default_str();
    app->add_option("--a", a, "inverse-gamma shape")->capture_default_str();
    app->add_option("--b", b, "inverse-gamma scale")->capture_default_str();
    app->add_option("--rho", rho, "prior inclusion probability")->capture_default_str();
  }

  SpikeSlabHyper build() const {
    try {
      return SpikeSlabHyper::create(v0, v1, a, b, rho);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
};

struct InputFlags {
  std::string path;
  std::string response;
  std::string delimiter = ",";
  bool add_intercept = false;

  void attach(CLI::App* app) {
    app->add_option("--input", path, "delimited file with a header row, '-' for stdin")->required();
    app->add_option("--response", response, "name of the response column")->required();
    app->add_option("--delimiter", delimiter, "field delimiter")->capture_default_str();
    app->add_flag("--add-intercept", add_intercept, "prepend a column of ones");
  }

  DesignColumns load(ResponseKind kind, std::istream& in) const {
    if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
    Table table;
    if (path == "-") {
      table = read_table(in, delimiter[0]);
    } else {
      std::ifstream file(path);
      if (!file) throw std::runtime_error("cannot open input file '" + path + "'");
      table = read_table(file, delimiter[0]);
    }
    return table_to_dataset(table, response, kind, add_intercept);
  }
};

struct FitFlags {
  double tol = 1e-6;
  std::size_t max_iter = 500;

  void attach(CLI::App* app) {
    app->add_option("--tol", tol, "convergence tolerance")->capture_default_str();
    app->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
  }

  FitOptions build() const {
    FitOptions o{tol, max_iter, false};
    try {
      o.validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    return o;
  }
};

struct TruthFlags {
  std::vector<double> beta;
  double sigma0 = 1.0;
  double corr = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--beta", beta, "true coefficients, comma separated")
        ->required()
        ->delimiter(',');
    app->add_option("--sigma0", sigma0, "noise scale")->capture_default_str();
    app->add_option("--corr", corr, "equicorrelation of the predictors")->capture_default_str();
  }

  TruthSpec build(double q_level) const {
    TruthSpec t;
    t.beta0 = Eigen::Map<const VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    t.sigma0 = sigma0;
    t.q_level = q_level;
    t.x_dist = corr == 0.0 ? XDistribution::iid() : XDistribution::equicorrelated(corr);
    try {
      t.validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    return t;
  }
};

Json to_json(const VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json hyper_json(const SpikeSlabHyper& h) {
  return Json{{"v0", h.v0()}, {"v1", h.v1()}, {"a", h.a()}, {"b", h.b()}, {"rho", h.rho()}};
}

Json envelope(const std::string& algorithm, const SpikeSlabHyper& hyper, Json shape, Json results) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["algorithm"] = algorithm;
  doc["hyper"] = hyper_json(hyper);
  doc["data_shape"] = std::move(shape);
  doc["results"] = std::move(results);
  return doc;
}

void emit(const std::string& text, const std::string& output, std::ostream& out) {
  if (output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(output, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file '" + output + "'");
  file << text;
  if (!file) throw std::runtime_error("failed writing output file '" + output + "'");
}

Json fit_json(const FitReport& r, const std::vector<std::string>& names) {
  Json res;
  res["mu"] = to_json(r.mu);
  res["w"] = to_json(r.w);
  res["tau"] = r.tau ? Json(*r.tau) : Json(nullptr);
  res["selected"] = r.selected;
  std::vector<std::string> picked;
  for (std::size_t j : r.selected) picked.push_back(names[j]);
  res["selected_names"] = picked;
  res["iterations"] = r.iterations;
  res["converged"] = r.converged;
  res["predictors"] = names;
  return res;
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::linear:
      return "linear";
    case Algorithm::collapsed:
      return "collapsed";
    case Algorithm::quantile:
      return "quantile";
    case Algorithm::logistic:
      return "logistic";
  }
  return "unknown";
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json opt_json(const std::optional<bool>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::istream& in) {
  CLI::App app{"Spike-and-slab variational Bayes variable selection", "ssvb"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "fit a model to a delimited file and report JSON");
  std::string fit_model;
  InputFlags fit_input;
  HyperFlags fit_hyper;
  FitFlags fit_flags;
  double fit_q = 0.5;
  std::string tilt = "root";
  std::string shape = "derivation";
  std::string fit_output;
  fit->add_option("--model", fit_model, "linear | collapsed | quantile | logistic")
      ->required()
      ->check(CLI::IsMember({"linear", "collapsed", "quantile", "logistic"}));
  fit_input.attach(fit);
  fit_hyper.attach(fit);
  fit_flags.attach(fit);
  auto* fit_q_opt = fit->add_option("--q-level", fit_q, "target quantile (quantile model)");
  auto* tilt_opt = fit->add_option("--tilt", tilt, "logistic tilt rule: root | literal")
                       ->check(CLI::IsMember({"root", "literal"}));
  auto* shape_opt =
      fit->add_option("--quantile-shape", shape, "q(sigma) shape: derivation | listing")
          ->check(CLI::IsMember({"derivation", "listing"}));
  fit->add_option("--output", fit_output, "write the report here instead of stdout");

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a synthetic data set as delimited text");
  std::string sim_model;
  TruthFlags sim_truth;
  std::size_t sim_n = 0;
  double sim_q = 0.5;
  std::uint64_t sim_seed = 1;
  std::string sim_output;
  sim->add_option("--model", sim_model, "linear | quantile | logistic")
      ->required()
      ->check(CLI::IsMember({"linear", "quantile", "logistic"}));
  sim->add_option("--n", sim_n, "number of rows")->required()->check(CLI::PositiveNumber);
  sim_truth.attach(sim);
  auto* sim_q_opt = sim->add_option("--q-level", sim_q, "target quantile (quantile model)");
  sim->add_option("--seed", sim_seed, "64-bit unsigned seed")->capture_default_str();
  sim->add_option("--output", sim_output, "write the data here instead of stdout");

  // oracle
  auto* orc = app.add_subcommand("oracle", "exact posterior over all inclusion patterns");
  std::string orc_model;
  InputFlags orc_input;
  HyperFlags orc_hyper;
  std::string orc_output;
  orc->add_option("--model", orc_model, "collapsed | model2")
      ->required()
      ->check(CLI::IsMember({"collapsed", "model2"}));
  orc_input.attach(orc);
  orc_hyper.attach(orc);
  orc->add_option("--output", orc_output, "write the report here instead of stdout");

  // experiment
  auto* exp = app.add_subcommand("experiment", "replicated simulate-and-fit study over n");
  std::string exp_alg;
  TruthFlags exp_truth;
  HyperFlags exp_hyper;
  FitFlags exp_fit;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 200;
  std::uint64_t exp_seed = 1;
  double exp_q = 0.5;
  std::string scaling = "fixed";
  double v0_constant = 0.1;
  double delta = 0.1;
  unsigned workers = 1;
  std::string exp_output;
  exp->add_option("--algorithm", exp_alg, "linear | collapsed | quantile | logistic")
      ->required()
      ->check(CLI::IsMember({"linear", "collapsed", "quantile", "logistic"}));
  exp->add_option("--n-grid", n_grid, "sample sizes, comma separated")->required()->delimiter(',');
  exp_truth.attach(exp);
  exp_hyper.attach(exp);
  exp_fit.attach(exp);
  exp->add_option("--reps", reps, "replications per cell")->capture_default_str();
  exp->add_option("--seed", exp_seed, "64-bit unsigned seed")->capture_default_str();
  auto* exp_q_opt = exp->add_option("--q-level", exp_q, "target quantile (quantile algorithm)");
  exp->add_option("--v0-scaling", scaling, "fixed | inv-sqrt-n | sqrt-n")
      ->check(CLI::IsMember({"fixed", "inv-sqrt-n", "sqrt-n"}))
      ->capture_default_str();
  exp->add_option("--v0-constant", v0_constant, "v0 = constant * n^(-+1/2) when scaled")
      ->capture_default_str();
  exp->add_option("--delta", delta, "margin in the v0 admissibility check")->capture_default_str();
  exp->add_option("--workers", workers, "worker threads")->capture_default_str();
  exp->add_option("--output", exp_output, "write the report here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit->parsed()) {
      const bool quantile = fit_model == "quantile";
      if (quantile && fit_q_opt->count() == 0) throw UsageError("--q-level is required for quantile");
      if (!quantile && fit_q_opt->count() > 0) throw UsageError("--q-level applies to quantile only");
      if (quantile && !(fit_q > 0.0 && fit_q < 1.0)) throw UsageError("--q-level must lie in (0, 1)");
      if (tilt_opt->count() > 0 && fit_model != "logistic") {
        throw UsageError("--tilt applies to logistic only");
      }
      if (shape_opt->count() > 0 && !quantile) {
        throw UsageError("--quantile-shape applies to quantile only");
      }
      const SpikeSlabHyper hyper = fit_hyper.build();
      const FitOptions opts = fit_flags.build();
      const ResponseKind kind =
          fit_model == "logistic" ? ResponseKind::binary : ResponseKind::continuous;
      const DesignColumns dc = fit_input.load(kind, in);

      FitReport report;
      Json extra;
      if (fit_model == "linear") {
        report = fit_linear(dc.data, hyper, opts);
      } else if (fit_model == "collapsed") {
        report = fit_collapsed(dc.data, hyper, opts);
      } else if (quantile) {
        QuantileOptions qo;
        qo.shape = shape == "listing" ? QuantileShape::listing : QuantileShape::derivation;
        report = fit_quantile(dc.data, fit_q, hyper, opts, qo);
        extra["q_level"] = fit_q;
        extra["quantile_shape"] = shape;
      } else {
        LogisticOptions lo;
        lo.tilt = tilt == "literal" ? TiltRule::literal : TiltRule::root;
        report = fit_logistic(dc.data, hyper, opts, lo);
        extra["tilt"] = tilt;
      }
      Json res = fit_json(report, dc.names);
      for (auto& [k, v] : extra.items()) res[k] = v;
      const Json doc = envelope(fit_model, hyper, Json{{"n", dc.data.n()}, {"p", dc.data.p()}}, res);
      emit(doc.dump(2) + "\n", fit_output, out);
      return kExitOk;
    }

    if (sim->parsed()) {
      const bool quantile = sim_model == "quantile";
      if (!quantile && sim_q_opt->count() > 0) throw UsageError("--q-level applies to quantile only");
      const TruthSpec truth = sim_truth.build(sim_q);
      const SimModel model = sim_model == "linear"     ? SimModel::linear
                             : sim_model == "quantile" ? SimModel::quantile
                                                       : SimModel::logistic;
      const SimulatedData s = simulate(model, truth, sim_n, sim_seed);
      Table table;
      table.header.push_back("y");
      for (std::size_t j = 0; j < s.data.p(); ++j) table.header.push_back("x" + std::to_string(j + 1));
      table.values.resize(s.data.x().rows(), s.data.x().cols() + 1);
      table.values.col(0) = s.data.y();
      table.values.rightCols(s.data.x().cols()) = s.data.x();
      std::ostringstream buf;
      write_table(buf, table);
      emit(buf.str(), sim_output, out);
      return kExitOk;
    }

    if (orc->parsed()) {
      const SpikeSlabHyper hyper = orc_hyper.build();
      const DesignColumns dc = orc_input.load(ResponseKind::continuous, in);
      if (dc.data.p() > kMaxEnumerationP) {
        throw UsageError("oracle enumerates 2^p models and supports p <= 20");
      }
      const ModelKind kind = orc_model == "collapsed" ? ModelKind::collapsed : ModelKind::model2;
      const ExactPosterior post = enumerate_posterior(dc.data, hyper, kind);
      Json res;
      res["inclusion"] = to_json(post.inclusion);
      res["map_model"] = post.map_model;
      std::vector<std::size_t> map_support;
      for (std::size_t j = 0; j < post.map_model.size(); ++j) {
        if (post.map_model[j]) map_support.push_back(j);
      }
      res["map_support"] = map_support;
      res["predictors"] = dc.names;
      if (dc.data.p() <= kMaxListedModelsP) {
        Json models = Json::array();
        for (std::size_t m = 0; m < post.models.size(); ++m) {
          models.push_back(Json{{"gamma", post.models[m].gamma},
                                {"log_weight", post.models[m].log_weight},
                                {"prob", post.probs[static_cast<Eigen::Index>(m)]}});
        }
        res["models"] = models;
      }
      const Json doc = envelope("oracle-" + orc_model, hyper,
                                Json{{"n", dc.data.n()}, {"p", dc.data.p()}}, res);
      emit(doc.dump(2) + "\n", orc_output, out);
      return kExitOk;
    }

    if (exp->parsed()) {
      ExperimentConfig cfg;
      cfg.algorithm = exp_alg == "linear"      ? Algorithm::linear
                      : exp_alg == "collapsed" ? Algorithm::collapsed
                      : exp_alg == "quantile"  ? Algorithm::quantile
                                               : Algorithm::logistic;
      const bool quantile = cfg.algorithm == Algorithm::quantile;
      if (!quantile && exp_q_opt->count() > 0) throw UsageError("--q-level applies to quantile only");
      cfg.truth = exp_truth.build(exp_q);
      cfg.n_grid = n_grid;
      cfg.hyper = exp_hyper.build();
      cfg.v0_scaling = scaling == "fixed"        ? V0Scaling::fixed
                       : scaling == "inv-sqrt-n" ? V0Scaling::inv_sqrt_n
                                                 : V0Scaling::sqrt_n;
      cfg.v0_constant = v0_constant;
      cfg.reps = reps;
      cfg.seed = exp_seed;
      cfg.delta = delta;
      cfg.fit = exp_fit.build();
      cfg.workers = workers;
      try {
        cfg.validate();
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
      const ExperimentReport rep = consistency_experiment(cfg);

      Json cells = Json::array();
      for (const CellMetrics& m : rep.cells) {
        cells.push_back(Json{{"n", m.cell.n},
                             {"p", m.cell.p},
                             {"v0", m.cell.v0},
                             {"v1", m.cell.v1},
                             {"cell_seed", m.cell_seed},
                             {"reps", m.reps},
                             {"failures", m.failures},
                             {"degraded", m.degraded},
                             {"recovery_rate", m.recovery_rate},
                             {"mean_linf_error", m.mean_linf_error},
                             {"mean_noise_error", opt_json(m.mean_noise_error)},
                             {"median_null_w", opt_json(m.median_null_w)},
                             {"min_signal_w", opt_json(m.min_signal_w)}});
      }
      Json res;
      res["seed"] = rep.seed;
      res["cells"] = cells;
      res["trends"] = Json{{"recovery_nondecreasing", rep.recovery_nondecreasing},
                           {"linf_decreasing", rep.linf_decreasing},
                           {"noise_decreasing", opt_json(rep.noise_decreasing)},
                           {"null_w_decreasing", opt_json(rep.null_w_decreasing)},
                           {"null_w_loglog_slope", opt_json(rep.null_w_loglog_slope)}};
      const Json doc = envelope(std::string("experiment-") + algorithm_name(cfg.algorithm),
                                cfg.hyper, Json{{"p", cfg.truth.beta0.size()}, {"n_grid", n_grid}},
                                res);
      emit(doc.dump(2) + "\n", exp_output, out);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << "usage error: no subcommand\n";
  return kExitUsage;
}

}  // namespace ssvb::cli
