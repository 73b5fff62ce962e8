#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "pdform/cli.hpp"

namespace {

using namespace pdform;
using namespace pdform::cli;

struct Options {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 42;
  std::optional<unsigned> shards;
  std::optional<double> tol_zero;
  std::optional<double> tol_pd;
  std::string output;
  bool exact = false;

  std::string form;
  std::string q;
  int d = 0;
  std::optional<int> n;
  std::optional<int> gram_d;
  std::string gamma;
  int max_k = 3;
  int trials = 10;
  std::string dirs;
  std::string h;
  bool no_fd = false;
  double step = 0.01;
  bool no_diagnostic = false;
  std::string gram;
  std::string functional;
  std::string sweep;
  std::string range;
  std::string direction;
};

RunConfig run_config(const Options& o, OutputFormat fallback) {
  RunConfig rc;
  rc.samples = o.samples;
  rc.seed = o.seed;
  if (o.shards) {
    if (*o.shards == 0) throw InputError("--shards must be positive");
    rc.shards = capped_shards(*o.shards);
  }
  rc.tol_zero = o.tol_zero;
  rc.tol_pd = o.tol_pd;
  rc.output = o.output.empty() ? fallback : parse_output_format(o.output);
  rc.exact = o.exact;
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volumes, moment matrices and finiteness checks for positive definite forms", "pdform"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--samples", o.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--shards", o.shards, "Parallel shards (capped by PDFORM_THREADS)");
  app.add_option("--tol-zero", o.tol_zero, "Absolute zero tolerance for generic-check");
  app.add_option("--tol-pd", o.tol_pd, "Relative eigenvalue tolerance for generic-check");
  app.add_option("--output", o.output, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
  app.add_flag("--exact", o.exact, "Rational arithmetic where supported");

  auto form_arg = [&o](CLI::App* c) { c->add_option("form", o.form, "Form JSON file")->required()->check(CLI::ExistingFile); };
  auto q_arg = [&o](CLI::App* c) {
    c->add_option("--Q", o.q, "Matrix JSON file")->required()->check(CLI::ExistingFile);
    c->add_option("--d", o.d, "Even degree")->required();
  };

  auto* volume = app.add_subcommand("volume", "Sublevel-set volume with closed form, quadrature and diagnostic");
  form_arg(volume);
  volume->add_flag("--no-diagnostic", o.no_diagnostic, "Skip the tail diagnostic");

  auto* moment = app.add_subcommand("moment-matrix", "Gaussian moment matrix M_d[Q] and sigma_d");
  q_arg(moment);

  auto* gram = app.add_subcommand("gram-check", "Residual of M_d[Q]^{-1} as a Gram matrix of (x^T Q x)^{d/2}");
  q_arg(gram);

  auto* sphere = app.add_subcommand("sphere-moments", "Sphere-measure moments against M_d[Q]");
  q_arg(sphere);
  sphere->add_option("--gamma", o.gamma, "Single moment index, e.g. 2,2");

  auto* cb = app.add_subcommand("classify-binary", "Exact finiteness verdict for a binary form");
  form_arg(cb);

  auto* gc = app.add_subcommand("generic-check", "Zeros and Hessian coranks of a non-negative form, n >= 3");
  form_arg(gc);

  auto* cm = app.add_subcommand("cm-check", "Complete-monotonicity sign checks");
  form_arg(cm);
  cm->add_option("--max-k", o.max_k, "Highest derivative order")->check(CLI::Range(1, 4));
  cm->add_option("--trials", o.trials, "Direction tuples")->check(CLI::NonNegativeNumber);

  auto* l2 = app.add_subcommand("l2l1-check", "L2/L1 extremal property");
  form_arg(l2);
  l2->add_option("--trials", o.trials, "Random L1-matched perturbations")->check(CLI::NonNegativeNumber);

  auto* der = app.add_subcommand("derivative", "Directional derivative of the weighted volume");
  der->set_help_flag("--help", "Print this help message and exit");
  form_arg(der);
  der->add_option("--dirs", o.dirs, "Form or array of forms")->required()->check(CLI::ExistingFile);
  der->add_option("--h", o.h, "Weight form (default 1)")->check(CLI::ExistingFile);
  der->add_flag("--no-fd", o.no_fd, "Skip the finite-difference cross-check");
  der->add_option("--step", o.step, "Relative finite-difference step")->check(CLI::PositiveNumber);

  auto* diag = app.add_subcommand("diagnostic", "Heavy-tail finiteness diagnostic");
  form_arg(diag);

  auto* lap = app.add_subcommand("laplace-check", "Laplace/Veronese path against the volume");
  form_arg(lap);

  auto* sos = app.add_subcommand("sos", "Gram-matrix forms");
  sos->require_subcommand(1);
  sos->fallthrough();
  auto gram_args = [&o](CLI::App* c) {
    c->add_option("--G", o.gram, "Gram matrix JSON file")->required()->check(CLI::ExistingFile);
    c->add_option("--n", o.n, "Variables (when the matrix has no basis)");
    c->add_option("--d", o.gram_d, "Degree (when the matrix has no basis)");
  };
  auto* sos_expand = sos->add_subcommand("expand", "Expand m^T G m");
  gram_args(sos_expand);
  auto* sos_vol = sos->add_subcommand("volume", "Volume of {m^T G m <= 1}");
  gram_args(sos_vol);
  auto* sos_nest = sos->add_subcommand("nesterov", "Gram form M_d(L)^{-1} of a pseudo-moment functional");
  auto* fopt = sos_nest->add_option("--functional", o.functional, "Functional JSON file")->check(CLI::ExistingFile);
  auto* qopt = sos_nest->add_option("--Q", o.q, "Gaussian functional from a matrix")->check(CLI::ExistingFile);
  sos_nest->add_option("--d", o.d, "Degree for --Q");
  fopt->excludes(qopt);

  auto* sweep = app.add_subcommand("sweep", "CSV volume sweep over a parameter t");
  sweep->add_option("--sweep", o.sweep, "Q=diag(1,t) or Q=[[...],...]");
  sweep->add_option("--form", o.form, "Base form g for g + t v")->check(CLI::ExistingFile);
  sweep->add_option("--direction", o.direction, "Direction form v for g + t v")->check(CLI::ExistingFile);
  sweep->add_option("range", o.range, "t=a..b or t=a..b:k")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const OutputFormat fallback = sweep->parsed() ? OutputFormat::csv : OutputFormat::json;
    const RunConfig rc = run_config(o, fallback);
    Result r;
    if (volume->parsed()) {
      r = cli::volume(read_form(o.form), rc, !o.no_diagnostic);
    } else if (moment->parsed()) {
      r = moment_matrix_command(read_matrix(o.q), o.d, rc);
    } else if (gram->parsed()) {
      r = gram_check(read_matrix(o.q), o.d, rc);
    } else if (sphere->parsed()) {
      std::optional<MultiIndex> gamma;
      if (!o.gamma.empty()) gamma = parse_gamma(o.gamma);
      r = sphere_moments(read_matrix(o.q), o.d, gamma, rc);
    } else if (cb->parsed()) {
      r = classify_binary_command(read_form(o.form));
    } else if (gc->parsed()) {
      r = generic_check_command(read_form(o.form), rc);
    } else if (cm->parsed()) {
      r = cm_check_command(read_form(o.form), o.max_k, o.trials, rc);
    } else if (l2->parsed()) {
      r = l2l1_check_command(read_form(o.form), o.trials, rc);
    } else if (der->parsed()) {
      std::optional<Form<Rational>> h;
      if (!o.h.empty()) h = read_form(o.h);
      r = derivative_command(read_form(o.form), read_forms(o.dirs), h, {!o.no_fd, o.step}, rc);
    } else if (diag->parsed()) {
      r = diagnostic_command(read_form(o.form), rc);
    } else if (lap->parsed()) {
      r = laplace_check_command(read_form(o.form), rc);
    } else if (sos_expand->parsed()) {
      r = cli::sos_expand(read_json_file(o.gram), o.n, o.gram_d, rc);
    } else if (sos_vol->parsed()) {
      r = sos_volume_command(read_json_file(o.gram), o.n, o.gram_d, rc);
    } else if (sos_nest->parsed()) {
      if (!o.functional.empty()) {
        r = sos_nesterov_functional(read_json_file(o.functional), rc);
      } else if (!o.q.empty() && o.d > 0) {
        r = sos_nesterov_gaussian(read_matrix(o.q), o.d, rc);
      } else {
        throw InputError("sos nesterov needs --functional or --Q with --d");
      }
    } else if (sweep->parsed()) {
      const SweepRange range = parse_sweep_range(o.range);
      if (!o.sweep.empty()) {
        r = sweep_quadratic(o.sweep, range, rc);
      } else if (!o.form.empty() && !o.direction.empty()) {
        r = sweep_form(read_form(o.form), read_form(o.direction), range, rc);
      } else {
        throw InputError("sweep needs --sweep or --form with --direction");
      }
    }
    std::cout << render(r.body, rc.output);
    return r.exit_code;
  } catch (const InputError& e) {
    std::cerr << "pdform: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "pdform: malformed input: " << e.what() << "\n";
    return 1;
  } catch (const ComputationError& e) {
    std::cerr << "pdform: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pdform: " << e.what() << "\n";
    return 2;
  }
}
