// Batch front end: measures, surgery, infiltration, verification and sweeps.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "epsbeta/epsbeta.hpp"

namespace {

using namespace epsbeta;
using nlohmann::json;

enum Exit { kOk = 0, kVerification = 1, kConfig = 2, kIo = 3, kPipeline = 4 };

struct RunConfig {
  std::string command;
  std::string input;
  std::string fixture;
  std::string density;
  std::string epsilon = "0";
  int i = -1;
  int j = -1;
  int h = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string cluster_out;
  std::string csv;
  std::string dump_infiltration;
  bool trace = false;
  std::string x;
  double radius = 0.0;
  double K_user = 1.0;
  std::string t_grid = "1e-2,1e-3,1e-4,1e-5,1e-6";
  int samples = 32;
  double C_prime = 1.0;
  double t_max = 0.0;
  int steps = 100;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "not a number: '" + item + "'");
    }
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "empty list");
  return out;
}

Point parse_point(const std::string& text) {
  const std::vector<double> v = parse_list(text);
  if (v.size() < 2 || v.size() > 3) fail(ErrorCode::InvalidArgument, "points need 2 or 3 coordinates");
  return Point{v[0], v[1], v.size() > 2 ? v[2] : 0.0};
}

GridCluster load_input(const RunConfig& c) {
  if (!c.fixture.empty()) return fixtures::by_name(c.fixture);
  if (c.input.empty()) fail(ErrorCode::InvalidArgument, "--input or --fixture is required");
  return load_cluster(c.input);
}

DensityField load_field(const RunConfig& c) {
  return c.density.empty() ? constant_density() : load_density(c.density);
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

void emit(const json& report, const RunConfig& c) {
  if (c.out.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    write_json(report, c.out);
  }
}

int run_measure(const RunConfig& c, json& report) {
  const GridCluster E = load_input(c);
  report["measure"] = to_json(measure(E, load_field(c)));
  return kOk;
}

int run_surgery(const RunConfig& c, json& report) {
  require(c.i >= 0 && c.j >= 0, "surgery needs --i and --j");
  const GridCluster E = load_input(c);
  const DensityField field = load_field(c);
  const double eps = parse_list(c.epsilon).at(0);
  SurgeryOptions opts;
  opts.seed = c.seed;
  opts.trace = c.trace;
  opts.K_user = c.K_user;
  std::optional<Point> x;
  if (!c.x.empty()) x = parse_point(c.x);
  const SurgeryPlan plan = plan_surgery(E, field, c.i, c.j, opts, x);
  // --epsilon always goes into the chamber given as --i.
  const TransferResult r = transfer_volume(E, field, plan, plan.swapped ? -eps : eps);
  const TransferBound b = verify_transfer_bound(E, r, field);
  report["plan"] = to_json(r.plan);
  report["bound"] = to_json(b);
  report["before"] = to_json(r.before);
  report["after"] = to_json(r.after);
  report["perimeter_decreased"] = r.perimeter_decreased;
  if (!c.cluster_out.empty()) save_cluster(r.cluster, c.cluster_out);
  return kOk;
}

int run_adjust(const RunConfig& c, json& report) {
  GridCluster E = load_input(c);
  const DensityField field = load_field(c);
  const std::vector<double> eps = parse_list(c.epsilon);
  SurgeryOptions opts;
  opts.seed = c.seed;
  opts.K_user = c.K_user;
  json steps = json::array();
  const MeasureReport before = measure(E, field);
  if (eps.size() == 1) {
    auto [F, rep] = adjust_single_chamber(E, field, c.h, eps[0], std::nullopt, opts);
    steps.push_back(to_json(rep));
    E = std::move(F);
  } else {
    require(static_cast<int>(eps.size()) == E.m(), "an epsilon vector needs one entry per chamber");
    // One chamber at a time; later calls avoid the balls of earlier ones.
    for (int h = 1; h <= E.m(); ++h) {
      if (eps[h - 1] == 0.0) continue;
      auto [F, rep] = adjust_single_chamber(E, field, h, eps[h - 1], std::nullopt, opts);
      for (const Ball& b : rep.balls) opts.forbidden.push_back(b);
      steps.push_back(to_json(rep));
      E = std::move(F);
    }
  }
  report["steps"] = steps;
  report["before"] = to_json(before);
  report["after"] = to_json(measure(E, field));
  if (!c.cluster_out.empty()) save_cluster(E, c.cluster_out);
  return kOk;
}

int run_infiltrate(const RunConfig& c, json& report) {
  require(c.i >= 0 && c.j >= 0, "infiltrate needs --i and --j");
  require(!c.x.empty(), "infiltrate needs --x");
  const GridCluster E = load_input(c);
  const DensityField field = load_field(c);
  const Point x = parse_point(c.x);
  double r = c.radius;
  if (!(r > 0.0)) {
    const double M = bound_M(field, x, 4096, E.dims());
    const RadiusSearch s = density_zero_radius_trace(E, x, c.i, c.j, 10.0 * std::pow(M, 4));
    json levels = json::array();
    for (const RadiusProbe& p : s.levels)
      levels.push_back(json{{"r_bar", p.r_bar}, {"small", p.small}, {"passing_r", p.passing_r}});
    report["radius_search"] = levels;
    r = s.radius;
  }
  auto [F, rep] = infiltrate(E, field, x, c.i, c.j, r);
  report["infiltration"] = to_json(rep);
  if (!c.dump_infiltration.empty()) {
    std::vector<std::uint8_t> mask(E.cell_count(), 0);
    for (std::size_t k : rep.mask) mask[k] = 255;
    write_mask_pgm(mask, E.shape(), c.dump_infiltration);
  }
  if (!c.cluster_out.empty()) save_cluster(F, c.cluster_out);
  return kOk;
}

int run_verify(const RunConfig& c, json& report) {
  const GridCluster E = load_input(c);
  const DensityField field = load_field(c);
  json checks = json::array();
  bool all = true;
  auto add = [&](const std::string& name, bool ok, json detail) {
    checks.push_back(json{{"name", name}, {"pass", ok}, {"detail", std::move(detail)}});
    all = all && ok;
  };
  const MeasureReport mr = measure(E, field);
  const double rel = std::abs(mr.perimeter - mr.perimeter_facets) / std::max(1.0, mr.perimeter);
  add("perimeter_formula_matches_facet_sum", rel <= 1e-12,
      json{{"formula", mr.perimeter}, {"facets", mr.perimeter_facets}});
  bool nonneg = true;
  for (double v : mr.volumes) nonneg = nonneg && v >= 0.0;
  add("volumes_nonnegative", nonneg, json{{"volumes", mr.volumes}});
  const double b0 = beta_exponent(0.0, E.dims());
  const double b1 = beta_exponent(1.0, E.dims());
  add("beta_endpoints", b0 == (E.dims() - 1.0) / E.dims() && b1 == 1.0, json{{"beta0", b0}, {"beta1", b1}});

  for (int h = 1; h <= E.m(); ++h) {
    const std::string tag = "chamber_" + std::to_string(h);
    const std::vector<int> chain = adjacency_chain(E, h);
    add(tag + "_linked_to_exterior", !chain.empty(), json{{"chain", chain}});
    if (chain.size() < 2) continue;
    try {
      SurgeryOptions opts;
      opts.seed = c.seed;
      opts.K_user = c.K_user;
      const SurgeryPlan plan = plan_surgery(E, field, chain[0], chain[1], opts);
      const double eps = 0.25 * plan.eps_bar;
      const TransferResult r = transfer_volume(E, field, plan, eps);
      const TransferBound b = verify_transfer_bound(E, r, field);
      const int gain = plan.i;
      const int lose = plan.j;
      const int probe = gain != 0 ? gain : lose;
      const double want = gain != 0 ? eps : -eps;
      const double got = r.after.volumes[probe - 1] - r.before.volumes[probe - 1];
      const double vol_err = std::abs(got - want) / std::max(1e-300, r.before.volumes[probe - 1]);
      bool others = true;
      for (int k = 1; k <= E.m(); ++k)
        if (k != gain && k != lose) others = others && r.after.volumes[k - 1] == r.before.volumes[k - 1];
      add(tag + "_transfer_volume", r.perimeter_decreased || (vol_err <= 1e-10 && others),
          json{{"relative_error", vol_err}, {"others_identical", others}});
      add(tag + "_transfer_bound", b.holds, to_json(b));
    } catch (const Error& e) {
      add(tag + "_surgery", false, json{{"error", std::string(e.name())}, {"message", e.what()}});
    }
  }
  report["checks"] = checks;
  report["pass"] = all;
  return all ? kOk : kVerification;
}

int run_cper(const RunConfig& c, json& report) {
  const GridCluster E = load_input(c);
  const DensityField field = load_field(c);
  CperOptions o;
  o.chamber = c.h;
  o.samples = c.samples;
  o.seed = c.seed;
  o.K_user = c.K_user;
  const CperCurve curve = cper_sweep(E, field, parse_list(c.t_grid), o);
  report["cper"] = to_json(curve);
  if (!c.csv.empty())
    write_csv(c.csv, {"t", "C_per", "omega"}, {curve.t_grid, curve.C_values, curve.omega_curve});
  return kOk;
}

int run_boundedness(const RunConfig& c, json& report) {
  const GridCluster E = load_input(c);
  const DensityField field = load_field(c);
  const Point center = c.x.empty() ? Point{0.0, 0.0, 0.0} : parse_point(c.x);
  double t_max = c.t_max;
  if (!(t_max > 0.0)) {
    t_max = 0.0;
    for (int d = 0; d < E.dims(); ++d) {
      const double lo = E.origin()[d] - center[d];
      const double hi = lo + E.shape()[d] * E.spacing();
      t_max += std::max(lo * lo, hi * hi);
    }
    t_max = std::sqrt(t_max);
  }
  require(c.steps >= 2, "--steps must be at least 2");
  std::vector<double> ts;
  for (int k = 0; k <= c.steps; ++k) ts.push_back(t_max * k / c.steps);
  const TruncationTrace tr = boundedness_check(E, field, c.C_prime, ts, center);
  report["boundedness"] = to_json(tr);
  if (!c.csv.empty())
    write_csv(c.csv, {"t", "v", "abs_dv", "margin"},
              {tr.t_grid, tr.v_values, tr.derivative, tr.differential_margin});
  return kOk;
}

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
      return kIo;
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidDensity:
    case ErrorCode::ExpressionSyntax:
      return kConfig;
    default:
      return kPipeline;
  }
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Volume-fixing surgery on labelled grid clusters"};
  // --h names a chamber, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  auto common = [&](CLI::App* sub) {
    sub->add_option("--input", c.input, "Cluster file (.pgm, .json sidecar or .raw)");
    sub->add_option("--fixture", c.fixture, "Built-in fixture instead of --input");
    sub->add_option("--density", c.density, "Density config (JSON); default f = g = 1");
    sub->add_option("--seed", c.seed, "Seed for sampled quantities");
    sub->add_option("--out", c.out, "Report path (JSON); default stdout");
    sub->add_option("--K", c.K_user, "Perimeter constant used when omega_x = 0");
  };
  auto* measure_cmd = app.add_subcommand("measure", "Volumes and cluster perimeter");
  common(measure_cmd);

  auto* surgery_cmd = app.add_subcommand("surgery", "One volume transfer between two chambers");
  common(surgery_cmd);
  surgery_cmd->add_option("--i", c.i)->required();
  surgery_cmd->add_option("--j", c.j)->required();
  surgery_cmd->add_option("--epsilon", c.epsilon, "Signed volume moved into chamber i");
  surgery_cmd->add_option("--x", c.x, "Interface point (comma separated)");
  surgery_cmd->add_option("--cluster-out", c.cluster_out);
  surgery_cmd->add_flag("--trace", c.trace);

  auto* adjust_cmd = app.add_subcommand("adjust", "Change one chamber volume (or all, by vector)");
  common(adjust_cmd);
  adjust_cmd->add_option("--h", c.h, "Chamber to adjust");
  adjust_cmd->add_option("--epsilon", c.epsilon, "Scalar, or one comma separated entry per chamber");
  adjust_cmd->add_option("--cluster-out", c.cluster_out);

  auto* infiltrate_cmd = app.add_subcommand("infiltrate", "Absorb foreign material near an interface");
  common(infiltrate_cmd);
  infiltrate_cmd->add_option("--i", c.i)->required();
  infiltrate_cmd->add_option("--j", c.j)->required();
  infiltrate_cmd->add_option("--x", c.x)->required();
  infiltrate_cmd->add_option("--radius", c.radius, "Ball radius; searched when omitted");
  infiltrate_cmd->add_option("--dump-infiltration", c.dump_infiltration, "PGM mask of I");
  infiltrate_cmd->add_option("--cluster-out", c.cluster_out);

  auto* verify_cmd = app.add_subcommand("verify", "Run the invariant suite on the input");
  common(verify_cmd);

  auto* cper_cmd = app.add_subcommand("cper", "Measured perimeter constant against t");
  common(cper_cmd);
  cper_cmd->add_option("--h", c.h);
  cper_cmd->add_option("--t", c.t_grid, "Comma separated t values");
  cper_cmd->add_option("--samples", c.samples);
  cper_cmd->add_option("--csv", c.csv);

  auto* bound_cmd = app.add_subcommand("boundedness", "Truncated volume v(t) around a centre");
  common(bound_cmd);
  bound_cmd->add_option("--x", c.x, "Centre; default origin");
  bound_cmd->add_option("--C-prime", c.C_prime);
  bound_cmd->add_option("--t-max", c.t_max);
  bound_cmd->add_option("--steps", c.steps);
  bound_cmd->add_option("--csv", c.csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  c.command = app.get_subcommands().front()->get_name();

  json report{{"command", c.command}, {"seed", c.seed}};
  int status = kOk;
  try {
    if (c.command == "measure") status = run_measure(c, report);
    else if (c.command == "surgery") status = run_surgery(c, report);
    else if (c.command == "adjust") status = run_adjust(c, report);
    else if (c.command == "infiltrate") status = run_infiltrate(c, report);
    else if (c.command == "verify") status = run_verify(c, report);
    else if (c.command == "cper") status = run_cper(c, report);
    else status = run_boundedness(c, report);
  } catch (const Error& e) {
    status = exit_for(e.code());
    report["error"] = std::string(e.name());
    report["message"] = e.what();
    std::cerr << "epsbeta: " << e.what() << '\n';
  }
  try {
    emit(report, c);
  } catch (const Error& e) {
    std::cerr << "epsbeta: " << e.what() << '\n';
    return kIo;
  }
  return status;
}
