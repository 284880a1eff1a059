// Command-line front end: simulate | fit | select | weights | diagnose.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "sparch/diagnostics.hpp"
#include "sparch/error.hpp"
#include "sparch/estimate.hpp"
#include "sparch/io.hpp"
#include "sparch/report.hpp"
#include "sparch/simulate.hpp"
#include "sparch/weights.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sparch;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInvalid = 2, kRegularity = 3, kIo = 4, kNoConvergence = 5 };

struct Shared {
  std::string data;
  std::string w;
  std::string b_matrix;
  std::string family = "sparch_gaussian";
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  bool plot_data = false;
  bool svg = false;
  std::string alternative = "two-sided";
};

struct Lattice {
  std::string dims;  // "RxC"
  std::string scheme = "rook";
  bool row_standardize = false;
  bool oriented = false;
};

struct Model {
  std::string formula = "y ~ 0";
  double b = 2.0;
  bool estimate_b = false;
  int max_iterations = 500;
  int starts = 3;
  std::string candidates;
};

struct SimArgs {
  double alpha = 1.0;
  double rho = 0.0;
  bool untruncated = false;
};

void add_shared(CLI::App* app, Shared& s) {
  app->add_option("--data", s.data, "data CSV with a header row");
  app->add_option("--w", s.w, "weights matrix W (.mtx Matrix Market or i,j,w CSV)");
  app->add_option("--b-matrix", s.b_matrix, "weights matrix B of the SAR mean equation");
  app->add_option("--family", s.family, "sparch_gaussian | esparch | complex | white_noise");
  app->add_option("--seed", s.seed, "random seed (generated and echoed when absent)");
  app->add_option("--out", s.out, "output directory (output file for 'weights')");
  app->add_flag("--plot-data", s.plot_data, "write plot-data CSV files");
  app->add_flag("--svg", s.svg, "also render the plots as SVG");
  app->add_option("--alternative", s.alternative, "Moran test alternative")
      ->check(CLI::IsMember({"two-sided", "greater", "less"}));
}

void add_lattice(CLI::App* app, Lattice& l) {
  app->add_option("--lattice", l.dims, "build W on a rows x cols grid, e.g. 20x20");
  app->add_option("--scheme", l.scheme, "rook | queen")->check(CLI::IsMember({"rook", "queen"}));
  app->add_flag("--row-standardize", l.row_standardize, "divide each row by its sum");
  app->add_flag("--oriented", l.oriented, "zero the entries above the diagonal");
}

void add_model(CLI::App* app, Model& m) {
  app->add_option("--formula", m.formula, "mean equation, e.g. \"y ~ 0\" or \"y ~ a + b\"");
  app->add_option("--b", m.b, "b of the exponential family");
  app->add_flag("--estimate-b", m.estimate_b, "estimate b instead of fixing it");
  app->add_option("--max-iter", m.max_iterations, "optimizer iterations per start");
  app->add_option("--starts", m.starts, "number of optimizer starts (1-3)");
}

WeightsMatrix build_lattice(const Lattice& l) {
  const auto x = l.dims.find_first_of("xX");
  std::size_t rows = 0;
  std::size_t cols = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument("");
    rows = std::stoul(l.dims.substr(0, x));
    cols = std::stoul(l.dims.substr(x + 1));
  } catch (const std::exception&) {
    throw InvalidArgument("--lattice expects ROWSxCOLS, got '" + l.dims + "'");
  }
  WeightsMatrix w = build_lattice_contiguity(
      {rows, cols, l.scheme == "queen" ? Contiguity::queen : Contiguity::rook});
  if (l.oriented) {
    std::vector<WeightsMatrix::Entry> lower;
    for (const auto& e : w.entries()) {
      if (e.row > e.col) lower.push_back(e);
    }
    w = WeightsMatrix::from_entries(w.size(), lower);
  }
  if (l.row_standardize) w = row_standardize(w);
  return w;
}

WeightsMatrix weights_from(const Shared& s, const Lattice& l) {
  if (!s.w.empty() && !l.dims.empty()) throw InvalidArgument("give either --w or --lattice, not both");
  if (!l.dims.empty()) return build_lattice(l);
  if (s.w.empty()) throw InvalidArgument("a weights matrix is required (--w or --lattice)");
  WeightsMatrix w = io::load_weights(s.w);
  return l.row_standardize ? row_standardize(w) : w;
}

std::uint64_t resolve_seed(const Shared& s) {
  if (s.seed) return *s.seed;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << seed << "\n";
  return seed;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int run_simulate(const Shared& s, const Lattice& l, const SimArgs& a, double b) {
  const WeightsMatrix w = weights_from(s, l);
  SimulationSpec spec;
  spec.alpha = a.alpha;
  spec.rho = a.rho;
  spec.b = b;
  spec.family = parse_family(s.family);
  spec.seed = resolve_seed(s);
  spec.force_untruncated = a.untruncated;
  const SimulatedField field = simulate(spec, w);

  const fs::path out(s.out);
  io::write_text(out / "field.csv", report::field_csv(field));
  json manifest{{"seed", spec.seed},
                {"family", std::string(family_name(spec.family))},
                {"parameters", {{"alpha", spec.alpha}, {"rho", spec.rho}, {"b", spec.b}}},
                {"n", w.size()},
                {"truncation", std::isfinite(field.truncation) ? json(field.truncation) : json("inf")},
                {"force_untruncated", spec.force_untruncated},
                {"w_digest", io::weights_digest(w)},
                {"w_nonzeros", w.nonzeros()},
                {"w_source", s.w.empty() ? "lattice " + l.dims + " " + l.scheme +
                                               (l.oriented ? " oriented" : "") +
                                               (l.row_standardize ? " row-standardized" : "")
                                         : s.w}};
  io::write_text(out / "manifest.json", dump(manifest));
  return kOk;
}

OptimizerConfig make_config(const Shared& s, const Model& m) {
  OptimizerConfig c;
  c.b = m.b;
  c.estimate_b = m.estimate_b;
  c.max_iterations = m.max_iterations;
  c.multi_starts = m.starts;
  c.moran_alternative = parse_alternative(s.alternative);
  return c;
}

std::string call_text(const std::string& command, const Shared& s, const std::string& formula) {
  std::string call = command + "(formula = " + formula + ", family = " +
                     std::string(family_name(parse_family(s.family))) + ", W = " + s.w;
  if (!s.b_matrix.empty()) call += ", B = " + s.b_matrix;
  return call + ")";
}

void write_plots(const Shared& s, const FitResult& fit) {
  if (!s.plot_data && !s.svg) return;
  const fs::path out(s.out);
  const WeightsMatrix& w = *fit.context->w;
  const Eigen::VectorXd e = fit.standardized_residuals;
  const MoranScatter m1 = moran_scatter_data(e, w);
  const MoranScatter m2 = moran_scatter_data(e.array().square().matrix(), w);
  const QqData q = qq_data(e);
  if (s.plot_data) {
    io::write_text(out / "moran_residuals.csv", report::moran_scatter_csv(m1));
    io::write_text(out / "moran_squared_residuals.csv", report::moran_scatter_csv(m2));
    io::write_text(out / "qq.csv", report::qq_csv(q));
  }
  if (s.svg) {
    io::write_text(out / "moran_residuals.svg",
                   report::scatter_svg(m1, "Moran scatter", "Residuals", "Spatially Lagged Residuals"));
    io::write_text(out / "moran_squared_residuals.svg",
                   report::scatter_svg(m2, "Moran scatter", "Squared Residuals",
                                       "Spatially Lagged Squared Residuals"));
    io::write_text(out / "qq.svg", report::qq_svg(q, "Normal Q-Q Plot"));
  }
}

std::shared_ptr<ModelContext> base_context(const Shared& s, const Model& m, const io::Formula& f,
                                           const io::Dataset& data) {
  auto ctx = std::make_shared<ModelContext>();
  ctx->response = f.response;
  ctx->y = data.column(f.response);
  ctx->intercept = f.intercept;
  ctx->family = parse_family(s.family);
  ctx->config = make_config(s, m);
  if (s.w.empty()) throw InvalidArgument("--w is required");
  ctx->w = std::make_shared<const WeightsMatrix>(io::load_weights(s.w));
  if (!s.b_matrix.empty()) ctx->b = std::make_shared<const WeightsMatrix>(io::load_weights(s.b_matrix));
  if (ctx->w->size() != data.rows()) {
    throw InvalidArgument("data has " + std::to_string(data.rows()) + " rows but W is " +
                          std::to_string(ctx->w->size()) + " x " + std::to_string(ctx->w->size()));
  }
  if (ctx->b && ctx->b->size() != data.rows()) {
    throw InvalidArgument("data has " + std::to_string(data.rows()) + " rows but B is " +
                          std::to_string(ctx->b->size()) + " x " + std::to_string(ctx->b->size()));
  }
  return ctx;
}

DesignMatrix columns_of(const io::Dataset& data, const std::vector<std::string>& names) {
  DesignMatrix d;
  d.x.resize(static_cast<Eigen::Index>(data.rows()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    d.x.col(static_cast<Eigen::Index>(j)) = data.column(names[j]);
    d.names.push_back(names[j]);
  }
  return d;
}

int write_nonconvergence(const Shared& s, const std::string& call, const ConvergenceError& e) {
  json j{{"call", call},
         {"converged", false},
         {"message", e.what()},
         {"best_point", e.best_point()},
         {"best_loglik", std::isfinite(e.best_value()) ? json(e.best_value()) : json(nullptr)}};
  io::write_text(fs::path(s.out) / "report.json", dump(j));
  std::cerr << "error: " << e.what() << "\n";
  return kNoConvergence;
}

void write_fit_outputs(const Shared& s, const FitResult& fit, const std::string& call) {
  const fs::path out(s.out);
  io::write_text(out / "report.json", dump(report::fit_to_json(fit, call)));
  const std::string text = report::summary(fit, call);
  io::write_text(out / "summary.txt", text);
  std::cout << text;
  write_plots(s, fit);
}

int run_fit(const Shared& s, const Model& m) {
  if (s.data.empty()) throw InvalidArgument("--data is required");
  const io::Formula f = io::parse_formula(m.formula);
  const io::Dataset data = io::load_dataset(s.data);
  auto ctx = base_context(s, m, f, data);
  ctx->table = columns_of(data, f.terms);
  ctx->columns = f.terms;
  const std::string call = call_text("fit", s, f.to_string());
  try {
    const FitResult fit = fit_model(ctx);
    write_fit_outputs(s, fit, call);
  } catch (const ConvergenceError& e) {
    return write_nonconvergence(s, call, e);
  }
  return kOk;
}

int run_select(const Shared& s, const Model& m) {
  if (s.data.empty()) throw InvalidArgument("--data is required");
  const io::Dataset data = io::load_dataset(s.data);
  const io::Formula f = io::parse_formula(m.formula);
  std::vector<std::string> names;
  if (!m.candidates.empty()) {
    std::stringstream ss(m.candidates);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) names.push_back(tok);
    }
  } else if (!f.terms.empty()) {
    names = f.terms;
  } else {
    for (const auto& n : data.names) {
      if (n != f.response) names.push_back(n);
    }
  }
  auto ctx = base_context(s, m, f, data);
  const DesignMatrix candidates = columns_of(data, names);
  const std::string call = call_text("select", s, f.response + " ~ .");
  try {
    const FitResult fit = stepwise_bic(ctx->y, candidates, ctx->b.get(), *ctx->w, ctx->family, ctx->config);
    write_fit_outputs(s, fit, call);
    io::write_text(fs::path(s.out) / "trace.csv", report::trace_csv(fit.trace));
  } catch (const ConvergenceError& e) {
    return write_nonconvergence(s, call, e);
  }
  return kOk;
}

int run_weights(const Shared& s, const Lattice& l, double rho) {
  const WeightsMatrix w = weights_from(s, l);
  const auto order = triangular_order(w);
  json info{{"n", w.size()},
            {"nonzeros", w.nonzeros()},
            {"row_standardized", w.rows_sum_to_one()},
            {"triangularizable", order.has_value()},
            {"squared_l1_norm", squared_l1_norm(w)},
            {"rho", rho},
            {"digest", io::weights_digest(w)}};
  const double a = truncation_bound(w, rho);
  info["truncation_bound"] = std::isfinite(a) ? json(a) : json("inf");
  std::cout << dump(info);
  if (s.out != ".") io::save_weights(s.out, w);
  return kOk;
}

int run_diagnose(const Shared& s, const std::string& column) {
  if (s.data.empty()) throw InvalidArgument("--data is required");
  if (s.w.empty()) throw InvalidArgument("--w is required");
  const io::Dataset data = io::load_dataset(s.data);
  const WeightsMatrix w = io::load_weights(s.w);
  const Eigen::VectorXd z = data.column(column);
  if (static_cast<std::size_t>(z.size()) != w.size()) {
    throw InvalidArgument("data has " + std::to_string(z.size()) + " rows but W is " +
                          std::to_string(w.size()) + " x " + std::to_string(w.size()));
  }
  const Alternative alt = parse_alternative(s.alternative);
  const Eigen::VectorXd z2 = z.array().square();
  const MoranTest t1 = morans_i(z, w, alt);
  const MoranTest t2 = morans_i(z2, w, alt);
  json j{{"column", column}, {"moran", report::moran_to_json(t1)}, {"moran_squared", report::moran_to_json(t2)}};
  io::write_text(fs::path(s.out) / "diagnostics.json", dump(j));
  std::cout << "Moran's I (" << column << "): " << report::format_sig(t1.statistic)
            << ", p-value: " << report::format_sig(t1.p_value) << "\n";
  std::cout << "Moran's I (" << column << "^2): " << report::format_sig(t2.statistic)
            << ", p-value: " << report::format_sig(t2.p_value) << "\n";
  const fs::path out(s.out);
  if (s.plot_data) {
    io::write_text(out / "moran.csv", report::moran_scatter_csv(moran_scatter_data(z, w)));
    io::write_text(out / "moran_squared.csv", report::moran_scatter_csv(moran_scatter_data(z2, w)));
    io::write_text(out / "qq.csv", report::qq_csv(qq_data(z, true)));
  }
  if (s.svg) {
    io::write_text(out / "moran.svg", report::scatter_svg(moran_scatter_data(z, w), "Moran scatter", column,
                                                          "Spatially Lagged " + column));
    io::write_text(out / "qq.svg", report::qq_svg(qq_data(z, true), "Normal Q-Q Plot"));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial ARCH simulation, estimation and diagnostics"};
  app.require_subcommand(1);

  Shared sim_s, fit_s, sel_s, w_s, diag_s;
  Lattice sim_l, w_l;
  SimArgs sim_a;
  Model fit_m, sel_m;
  double sim_b = 2.0;
  double w_rho = 1.0;
  std::string diag_column = "y";

  auto* sim = app.add_subcommand("simulate", "simulate a spatial ARCH field");
  add_shared(sim, sim_s);
  add_lattice(sim, sim_l);
  sim->add_option("--alpha", sim_a.alpha, "alpha > 0");
  sim->add_option("--rho", sim_a.rho, "rho >= 0");
  sim->add_option("--b", sim_b, "b of the exponential family");
  sim->add_flag("--untruncated", sim_a.untruncated, "draw untruncated errors even for cyclic W");

  auto* fit = app.add_subcommand("fit", "quasi-maximum-likelihood fit");
  add_shared(fit, fit_s);
  add_model(fit, fit_m);

  auto* sel = app.add_subcommand("select", "stepwise BIC covariate selection");
  add_shared(sel, sel_s);
  add_model(sel, sel_m);
  sel->add_option("--candidates", sel_m.candidates, "comma-separated candidate columns");

  auto* wcmd = app.add_subcommand("weights", "build, convert and inspect weights matrices");
  add_shared(wcmd, w_s);
  add_lattice(wcmd, w_l);
  wcmd->add_option("--rho", w_rho, "rho for the reported truncation bound");

  auto* diag = app.add_subcommand("diagnose", "Moran tests and plot data for a data column");
  add_shared(diag, diag_s);
  diag->add_option("--column", diag_column, "column to test");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*sim) return run_simulate(sim_s, sim_l, sim_a, sim_b);
    if (*fit) return run_fit(fit_s, fit_m);
    if (*sel) return run_select(sel_s, sel_m);
    if (*wcmd) return run_weights(w_s, w_l, w_rho);
    if (*diag) return run_diagnose(diag_s, diag_column);
  } catch (const RegularityViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRegularity;
  } catch (const SingularSystem& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRegularity;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
