#include "sublift/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sublift/cost_volume.hpp"
#include "sublift/image_io.hpp"
#include "sublift/lifting.hpp"
#include "sublift/oracles.hpp"
#include "sublift/problems.hpp"

namespace sublift {

namespace {

const char* command_name(Subcommand c) {
  switch (c) {
    case Subcommand::Rof: return "rof";
    case Subcommand::Robust: return "robust";
    case Subcommand::Stereo: return "stereo";
    case Subcommand::Unwrap: return "unwrap";
    case Subcommand::Dff: return "dff";
    case Subcommand::Verify: return "verify";
  }
  return "?";
}

void require_file(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing required input: ") + what);
  if (!std::filesystem::is_regular_file(p)) throw UsageError(std::string(what) + " does not exist: " + p.string());
}

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("SUBLIFT_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) omp_set_num_threads(static_cast<int>(std::min(n, static_cast<long>(omp_get_max_threads()))));
  }
#endif
}

CostVolume load_costs(const RunConfig& cfg) {
  if (!cfg.costs.empty()) return read_cvol(cfg.costs);
  if (cfg.command == Subcommand::Stereo) {
    StereoOptions opt;
    opt.min_disparity = cfg.min_disparity;
    opt.max_disparity = cfg.max_disparity;
    opt.truncation = cfg.truncation;
    return build_stereo_cost(read_image(cfg.left), read_image(cfg.right), opt);
  }
  std::vector<ScalarField> stack;
  for (const auto& p : cfg.stack) stack.push_back(read_image(p));
  return build_dff_cost(stack, cfg.dff_window);
}

ProblemSpec build_problem(const RunConfig& cfg) {
  double lo = cfg.gamma_min, hi = cfg.gamma_max;
  auto data = [&]() -> decltype(ProblemSpec::data) {
    switch (cfg.command) {
      case Subcommand::Rof: return RofParams{read_image(cfg.input)};
      case Subcommand::Robust: return TruncQuadParams{read_image(cfg.input), cfg.alpha, cfg.nu};
      case Subcommand::Unwrap: return UnwrapParams{read_image(cfg.input)};
      case Subcommand::Stereo:
      case Subcommand::Dff: {
        CostVolume cv = load_costs(cfg);
        if (cfg.command == Subcommand::Dff || !cfg.costs.empty()) lo = cv.gamma_min, hi = cv.gamma_max;
        if (cfg.command == Subcommand::Dff) return DffParams{std::move(cv)};
        return StereoParams{std::move(cv)};
      }
      case Subcommand::Verify: break;
    }
    throw ArgumentError("verify has no problem instance");
  }();
  ProblemSpec spec{std::move(data), LabelSpace::uniform(lo, hi, cfg.labels), cfg.lambda, cfg.regularizer,
                   cfg.sublabels};
  spec.validate();
  return spec;
}

void write_summary(const std::filesystem::path& path, const std::map<std::string, std::string>& kv,
                   const std::vector<std::string>& order) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& key : order) os << key << " = " << kv.at(key) << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

void RunConfig::validate() const {
  if (command == Subcommand::Verify) return;
  if (labels < 2) throw UsageError("--labels must be >= 2");
  if (!(gamma_min < gamma_max)) throw UsageError("--gamma-min must be < --gamma-max");
  if (!(lambda > 0.0)) throw UsageError("--lambda must be > 0");
  if (max_iters < 1) throw UsageError("--max-iters must be >= 1");
  if (!(tol >= 0.0)) throw UsageError("--tol must be >= 0");
  if (sublabels < 2) throw UsageError("--sublabels must be >= 2");
  switch (command) {
    case Subcommand::Rof:
    case Subcommand::Unwrap: require_file(input, "--input"); break;
    case Subcommand::Robust:
      require_file(input, "--input");
      if (!(alpha > 0.0) || !(nu > 0.0)) throw UsageError("--alpha and --nu must be > 0");
      break;
    case Subcommand::Stereo:
      if (!costs.empty()) {
        require_file(costs, "--costs");
      } else {
        require_file(left, "--left");
        require_file(right, "--right");
        if (max_disparity <= min_disparity) throw UsageError("--max-disparity must exceed --min-disparity");
      }
      break;
    case Subcommand::Dff:
      if (!costs.empty()) {
        require_file(costs, "--costs");
      } else {
        if (stack.size() < 2) throw UsageError("--stack needs at least 2 images");
        for (const auto& p : stack) require_file(p, "--stack");
      }
      break;
    case Subcommand::Verify: break;
  }
}

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  RunConfig cfg;
  CLI::App app{"Sublabel-accurate lifting for scalar variational problems", "sublift"};
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string input, left, right, costs, output = cfg.output_dir.string();
  std::vector<std::string> stack;
  std::string method = "sublabel", regularizer = "iso";
  app.add_option("--input,-i", input, "Input image (PGM or PFM)");
  app.add_option("--left", left, "Left stereo image");
  app.add_option("--right", right, "Right stereo image");
  app.add_option("--stack", stack, "Focal stack images, in label order");
  app.add_option("--costs", costs, "Precomputed CVOL cost volume (stereo, dff)");
  app.add_option("--output,-o", output, "Output directory");
  auto* o_labels = app.add_option("--labels,-L", cfg.labels, "Number of labels");
  auto* o_gmin = app.add_option("--gamma-min", cfg.gamma_min, "Lower end of the label range");
  auto* o_gmax = app.add_option("--gamma-max", cfg.gamma_max, "Upper end of the label range");
  auto* o_lambda = app.add_option("--lambda", cfg.lambda, "Regularization weight");
  app.add_option("--method", method, "sublabel | baseline")->check(CLI::IsMember({"sublabel", "baseline"}));
  app.add_option("--regularizer", regularizer, "iso | aniso")->check(CLI::IsMember({"iso", "aniso"}));
  app.add_option("--max-iters", cfg.max_iters, "Iteration cap");
  app.add_option("--tol", cfg.tol, "Residual stopping tolerance");
  app.add_flag("--adaptive,!--no-adaptive", cfg.adaptive, "Residual-balancing step sizes");
  app.add_flag("--deterministic,!--no-deterministic", cfg.deterministic, "Reproducible logs (no timings)");
  app.add_option("--sublabels,-S", cfg.sublabels, "Samples per interval for sampled costs");
  app.add_option("--alpha", cfg.alpha, "Robust dataterm weight");
  app.add_option("--nu", cfg.nu, "Robust truncation level");
  app.add_option("--min-disparity", cfg.min_disparity, "Smallest disparity");
  app.add_option("--max-disparity", cfg.max_disparity, "Largest disparity");
  app.add_option("--truncation", cfg.truncation, "Stereo gradient-difference truncation");
  app.add_option("--window", cfg.dff_window, "Depth-from-focus contrast window");
  app.add_option("--seed", cfg.seed, "Random seed for verify");

  const std::vector<std::pair<Subcommand, const char*>> subs = {
      {Subcommand::Rof, "ROF denoising"},
      {Subcommand::Robust, "Truncated quadratic denoising"},
      {Subcommand::Stereo, "Stereo matching"},
      {Subcommand::Unwrap, "Phase unwrapping"},
      {Subcommand::Dff, "Depth from focus"},
      {Subcommand::Verify, "Run the oracle checks"},
  };
  std::vector<CLI::App*> handles;
  for (const auto& [c, desc] : subs) handles.push_back(app.add_subcommand(command_name(c), desc));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  for (std::size_t j = 0; j < subs.size(); ++j)
    if (handles[j]->parsed()) cfg.command = subs[j].first;
  cfg.input = input, cfg.left = left, cfg.right = right, cfg.costs = costs, cfg.output_dir = output;
  for (const auto& s : stack) cfg.stack.emplace_back(s);
  cfg.method = method == "baseline" ? Method::Baseline : Method::Sublabel;
  cfg.regularizer = regularizer == "aniso" ? RegularizerKind::Anisotropic : RegularizerKind::Isotropic;

  const bool have_lambda = o_lambda->count() > 0;
  const bool have_range = o_gmin->count() > 0 || o_gmax->count() > 0;
  switch (cfg.command) {
    case Subcommand::Rof:
      if (!have_lambda) cfg.lambda = 0.25;
      break;
    case Subcommand::Unwrap:
      if (!have_lambda) cfg.lambda = 0.005;
      if (o_gmin->count() == 0) cfg.gamma_min = 0.0;
      if (o_gmax->count() == 0) cfg.gamma_max = 4.0 * std::numbers::pi;
      break;
    case Subcommand::Stereo:
      if (!have_range) cfg.gamma_min = cfg.min_disparity, cfg.gamma_max = cfg.max_disparity;
      break;
    default: break;
  }
  (void)o_labels;
  cfg.validate();
  return cfg;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  apply_thread_cap();
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());

  if (cfg.command == Subcommand::Verify) {
    const VerifyReport rep = run_verification(cfg.seed);
    rep.write_text(out);
    std::ofstream txt(cfg.output_dir / "verify.txt");
    if (!txt) throw IoError("cannot write verify.txt");
    rep.write_text(txt);
    rep.write_csv(cfg.output_dir / "verify.csv");
    return rep.passed() ? kExitOk : kExitNumerical;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const ProblemSpec spec = build_problem(cfg);
  const CostFunction rho = spec.cost();

  SolverConfig sc;
  sc.max_iters = cfg.max_iters;
  sc.stop_tol = cfg.tol;
  sc.lambda = cfg.lambda;
  sc.adaptive = cfg.adaptive;
  sc.regularizer = cfg.regularizer;
  sc.deterministic = cfg.deterministic;

  SolveResult res;
  try {
    res = cfg.method == Method::Sublabel ? solve_sublabel(spec.sublabel_dataterm(), sc, rho)
                                         : solve_baseline(spec.baseline_costs(), sc, rho);
  } catch (const DivergenceError& e) {
    e.log().write_csv(cfg.output_dir / "energy.csv");
    err << "sublift: solver diverged at iteration " << e.iteration() << '\n';
    return kExitNumerical;
  }
  res.log.write_csv(cfg.output_dir / "energy.csv");

  const ScalarField u = unlift_field(spec.ls, res.u);
  const double energy = energy_scalar(rho, u, cfg.lambda, cfg.regularizer);
  write_pfm(cfg.output_dir / "result.pfm", u);
  const double umin = u.values.minCoeff(), umax = u.values.maxCoeff();
  ScalarField preview(u.grid);
  if (umax > umin) preview.values = (u.values.array() - umin) / (umax - umin);
  else preview.values.setZero();
  write_pgm(cfg.output_dir / "result.pgm", preview);

  const double seconds =
      cfg.deterministic ? 0.0 : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const GridShape g = spec.grid();
  const Index L = spec.ls.num_labels();
  std::map<std::string, std::string> kv{
      {"command", command_name(cfg.command)},
      {"method", cfg.method == Method::Sublabel ? "sublabel" : "baseline"},
      {"regularizer", cfg.regularizer == RegularizerKind::Isotropic ? "iso" : "aniso"},
      {"width", std::to_string(g.width)},
      {"height", std::to_string(g.height)},
      {"labels", std::to_string(L)},
      {"gamma_min", fmt(spec.ls.min())},
      {"gamma_max", fmt(spec.ls.max())},
      {"lambda", fmt(cfg.lambda)},
      {"final_energy", fmt(energy)},
      {"iterations", std::to_string(res.iterations)},
      {"converged", res.converged ? "true" : "false"},
      {"variable_count_baseline", "4N(L-1) = " + std::to_string(variable_count(g, L, Method::Baseline))},
      {"variable_count_sublabel", "6N(L-1)+N = " + std::to_string(variable_count(g, L, Method::Sublabel))},
      {"preview_min", fmt(umin)},
      {"preview_max", fmt(umax)},
      {"wall_time_seconds", fmt(seconds)},
  };
  write_summary(cfg.output_dir / "summary.txt", kv,
                {"command", "method", "regularizer", "width", "height", "labels", "gamma_min", "gamma_max", "lambda",
                 "final_energy", "iterations", "converged", "variable_count_baseline", "variable_count_sublabel",
                 "preview_min", "preview_max", "wall_time_seconds"});
  out << command_name(cfg.command) << ": energy " << fmt(energy) << " after " << res.iterations << " iterations"
      << (res.converged ? " (converged)" : "") << '\n';
  return kExitOk;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = parse_args(argc, argv, out);
    if (!cfg) return kExitOk;
    return run(*cfg, out, err);
  } catch (const UsageError& e) {
    err << "sublift: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "sublift: " << e.what() << '\n';
    return kExitIo;
  } catch (const InputError& e) {
    err << "sublift: " << e.what() << '\n';
    return kExitIo;
  } catch (const DivergenceError& e) {
    err << "sublift: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "sublift: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace sublift
