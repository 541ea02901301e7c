#include "epsbeta/report_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace epsbeta {

using nlohmann::json;

json finite_or_tag(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json to_json(const Point& p) { return json::array({p[0], p[1], p[2]}); }

json to_json(const Box& b) {
  return json{{"lo", {b.lo[0], b.lo[1], b.lo[2]}}, {"hi", {b.hi[0], b.hi[1], b.hi[2]}}};
}

json to_json(const Ball& b) { return json{{"center", to_json(b.center)}, {"radius", b.radius}}; }

json to_json(const std::vector<Check>& checks) {
  json out = json::array();
  for (const Check& c : checks)
    out.push_back(json{{"name", c.name},
                       {"value", finite_or_tag(c.value)},
                       {"bound", finite_or_tag(c.bound)},
                       {"holds", c.holds}});
  return out;
}

json to_json(const MeasureReport& r) {
  json pairs = json::array();
  for (const auto& [k, v] : r.interface_breakdown)
    pairs.push_back(json{{"i", k.first}, {"j", k.second}, {"area", v}});
  return json{{"volumes", r.volumes},
              {"perimeter", r.perimeter},
              {"perimeter_facets", r.perimeter_facets},
              {"per_chamber_perimeter", r.per_chamber_perimeter},
              {"interfaces", pairs}};
}

json to_json(const FlatnessStats& s) {
  json fb = json::object();
  for (const auto& [k, v] : s.foreign_boundary) fb[std::to_string(k)] = v;
  json ft = json::object();
  for (const auto& [k, v] : s.foreign_trace) ft[std::to_string(k)] = v;
  return json{{"interface_density_i", s.interface_density_i},
              {"interface_density_j", s.interface_density_j},
              {"slab_excess", s.slab_excess},
              {"misvolume", s.misvolume},
              {"foreign_boundary", fb},
              {"foreign_trace", ft},
              {"good_fraction", s.good_fraction},
              {"pass", s.pass()},
              {"checks", to_json(s.checks)}};
}

json to_json(const SurgeryPlan& p) {
  json j{{"x_bar", to_json(p.x_bar)},
         {"i", p.i},
         {"j", p.j},
         {"swapped", p.swapped},
         {"axis", p.frame.axis},
         {"sign", p.frame.sign},
         {"cube", to_json(p.cube)},
         {"a", p.a},
         {"N", p.N},
         {"m", p.m},
         {"M", p.M},
         {"omega_x", p.omega_x},
         {"omega_hat", p.omega_hat},
         {"omega_bar", p.omega_bar},
         {"K_user", p.K_user},
         {"C", p.C},
         {"K_required", p.K_required},
         {"rho", p.rho},
         {"L", p.L},
         {"eps_bar", p.eps_bar},
         {"flatness", to_json(p.flatness)},
         {"bad_columns", p.good.bad_measure},
         {"bad_column_boundary", p.good.bad_boundary},
         {"epsilon", p.epsilon},
         {"reversed", p.reversed},
         {"checks", to_json(p.checks)},
         {"trace", p.trace}};
  if (p.epsilon != 0.0 && !p.decreased) {
    j["ell"] = p.ell;
    j["n_ell"] = p.n_ell;
    j["Q_eps"] = to_json(p.Q_eps);
    j["H"] = p.H;
    j["sigma_minus"] = p.sigma_minus;
    j["sigma_plus"] = p.sigma_plus;
    j["delta_bar"] = p.delta_bar;
    j["delta"] = p.delta;
    j["K_strips"] = p.K_strips;
    j["strip_index"] = p.strip_index;
  }
  if (p.decreased)
    j["perimeter_decreased"] = json{{"absorbed", p.decreased->absorbed},
                                    {"into", p.decreased->into},
                                    {"branch", p.decreased->branch},
                                    {"before", p.decreased->perimeter_before},
                                    {"after", p.decreased->perimeter_after}};
  return j;
}

json to_json(const TransferBound& b) {
  json terms = json::array();
  for (const TermReport& t : b.terms)
    terms.push_back(
        json{{"name", t.name}, {"measured", t.measured}, {"budget", t.budget}, {"within", t.within}});
  return json{{"increment", b.increment},
              {"K_required", b.K_required},
              {"bound", b.bound},
              {"holds", b.holds},
              {"terms", terms},
              {"outside_residual", b.outside_residual}};
}

json to_json(const AdjustReport& r) {
  json transfers = json::array();
  for (const ChainTransfer& t : r.transfers)
    transfers.push_back(json{{"from", t.from},
                             {"to", t.to},
                             {"x_bar", to_json(t.x_bar)},
                             {"ball", to_json(t.ball)},
                             {"increment", t.increment},
                             {"K_required", t.K_required},
                             {"bound_holds", t.bound_holds}});
  json balls = json::array();
  for (const Ball& b : r.balls) balls.push_back(to_json(b));
  return json{{"h", r.h},
              {"epsilon", r.epsilon},
              {"chain", r.chain},
              {"transfers", transfers},
              {"balls", balls},
              {"K0", r.K0},
              {"increment", r.increment},
              {"bound", r.bound},
              {"bound_holds", r.bound_holds},
              {"perimeter_decreased", r.perimeter_decreased},
              {"before", to_json(r.before)},
              {"after", to_json(r.after)}};
}

json to_json(const InBallReport& r) {
  return json{{"i", r.i},
              {"j", r.j},
              {"ball", to_json(r.ball)},
              {"epsilon", r.epsilon},
              {"beta", r.beta},
              {"x_bar", to_json(r.x_bar)},
              {"n_ell", r.n_ell},
              {"delta", r.delta},
              {"increment", r.increment},
              {"ratio", finite_or_tag(r.ratio)},
              {"confined", r.confined},
              {"before", to_json(r.before)},
              {"after", to_json(r.after)}};
}

json to_json(const InfiltrationReport& r) {
  return json{{"center", to_json(r.center)},
              {"radius", r.radius},
              {"i", r.i},
              {"j", r.j},
              {"swapped", r.swapped},
              {"M", r.M},
              {"H_const", r.H_const},
              {"infiltration_volume", r.infiltration_volume},
              {"D_area", r.D_area},
              {"Gamma1_area", r.Gamma1_area},
              {"Gamma2_area", r.Gamma2_area},
              {"case_taken", r.case_taken},
              {"no_infiltration", r.no_infiltration},
              {"perimeter_before", r.perimeter_before},
              {"perimeter_after", r.perimeter_after},
              {"perimeter_drop", r.perimeter_drop},
              {"symmetric_difference_volume", r.symmetric_difference_volume},
              {"C_const", r.C_const},
              {"drop_bound", r.drop_bound},
              {"drop_bound_holds", r.drop_bound_holds},
              {"ball_cleared", r.ball_cleared},
              {"confined", r.confined}};
}

json to_json(const RequiredK& r) {
  return json{{"M", r.M},
              {"omega_x", r.omega_x},
              {"C", r.C},
              {"omega_hat", r.omega_hat},
              {"K", r.K},
              {"fallback", r.fallback}};
}

json to_json(const CperCurve& c) {
  return json{{"t_grid", c.t_grid},
              {"C_values", c.C_values},
              {"omega_curve", c.omega_curve},
              {"successes", c.successes},
              {"failures", c.failures},
              {"eps_caps", c.eps_caps},
              {"fit_ratio", finite_or_tag(c.fit_ratio)},
              {"note", c.note}};
}

json to_json(const TruncationTrace& t) {
  return json{{"center", to_json(t.center)},
              {"t_grid", t.t_grid},
              {"v_values", t.v_values},
              {"derivative", t.derivative},
              {"perimeter_inside", t.perimeter_inside},
              {"perimeter_outside", t.perimeter_outside},
              {"differential_margin", t.differential_margin},
              {"negative_steps", t.negative_steps},
              {"M", t.M},
              {"nonincreasing", t.nonincreasing},
              {"verdict", t.verdict}};
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size())
    fail(ErrorCode::InvalidArgument, "CSV header and column count differ");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k)
      out << (k ? "," : "") << (r < columns[k].size() ? format17(columns[k][r]) : "");
    out << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace epsbeta
