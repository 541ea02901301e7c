#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epsbeta/column_ops.hpp"
#include "epsbeta/density.hpp"
#include "epsbeta/grid_cluster.hpp"
#include "epsbeta/measures.hpp"

namespace epsbeta {

/// One numeric inequality evaluated along the pipeline: value <= bound.
struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool holds = true;
};

struct FlatnessStats {
  double interface_density_i = 0.0;
  double interface_density_j = 0.0;
  double slab_excess = 0.0;
  double misvolume = 0.0;
  std::map<int, double> foreign_boundary;  ///< H^{N-1}(d*E_n in Q) for n not in {i, j}
  std::map<int, double> foreign_trace;     ///< H^{N-1}(E_n on the cube faces)
  double good_fraction = 1.0;

  bool core_pass = false;     ///< densities, slab excess and misvolume
  bool foreign_pass = false;  ///< small boundary of every foreign chamber
  std::vector<Check> checks;

  bool pass() const { return core_pass && foreign_pass; }
  double foreign_trace_total() const;
};

struct GoodSetReport {
  std::vector<std::size_t> columns;  ///< good columns, indices into the cube section order
  std::size_t total_columns = 0;
  double bad_measure = 0.0;   ///< H^{N-1}(Q \ G)
  double bad_boundary = 0.0;  ///< boundary mass above Q \ G
  std::vector<Check> checks;
  std::vector<bool> good;  ///< per cube column
};

struct InterfacePoint {
  Point x{0.0, 0.0, 0.0};
  int i = 0;
  int j = 0;
  bool swapped = false;
  /// i = 0, or chamber i shares no boundary with the exterior.
  bool condition_holds = true;
};

/// Early exit of the cube search: a foreign chamber was absorbed and the
/// perimeter strictly decreased, so no volume transfer is needed.
struct PerimeterDecrease {
  int absorbed = 0;
  int into = 0;
  std::string branch;
  double perimeter_before = 0.0;
  double perimeter_after = 0.0;
};

struct SurgeryOptions {
  double K_user = 1.0;  ///< perimeter constant used when omega_x = 0
  int probes = 4096;
  /// Replaces omega_hat (used by the constant sweep).
  std::optional<double> omega_override;
  /// Balls the working cube must avoid (with a two-cell gap).
  std::vector<Ball> forbidden;
  /// Largest cube side in cells; 0 means as large as the grid allows.
  int max_cube_cells = 0;
  /// Interface facets examined when looking for the flattest point.
  int max_candidates = 1024;
  std::uint64_t seed = 0;
  bool trace = false;
};

struct SurgeryPlan {
  // Interface point and orientation.
  Point x_bar{0.0, 0.0, 0.0};
  int i = 0;
  int j = 0;
  bool swapped = false;
  bool condition_holds = true;
  LocalFrame frame;   ///< E_i below
  Index3 center{0, 0, 0};  ///< cube centre node
  int n_a = 0;
  Box cube;

  // Constants.
  int N = 2;
  int m = 1;
  double h = 1.0;
  double a = 0.0;
  double M = 1.0;
  double omega_x = 0.0;
  double omega_hat = 0.0;
  double omega_bar = 0.0;  ///< omega_x(a sqrt(N) / 2)
  double K_user = 1.0;
  double C = 0.0;
  double K_required = 0.0;
  double rho = 0.0;
  double L = 0.0;
  double eps_bar = 0.0;

  FlatnessStats flatness;
  GoodSetReport good;

  // Filled per epsilon by select_subcube_and_strips.
  double epsilon = 0.0;
  bool reversed = false;  ///< epsilon < 0: E_j is the lower phase
  double ell_nominal = 0.0;
  double ell = 0.0;
  int n_ell = 0;
  Box Q_eps;
  int H = 0;
  double sigma_minus = 0.0;
  double sigma_plus = 0.0;
  double delta_bar = 0.0;
  double delta = 0.0;
  long long K_strips = 0;
  long long strip_index = -1;

  std::uint64_t seed = 0;
  std::vector<Check> checks;
  std::optional<PerimeterDecrease> decreased;
  nlohmann::json trace = nlohmann::json::array();

  /// Frame in which the phase gaining volume lies below.
  LocalFrame transfer_frame() const;
  int lower() const { return reversed ? j : i; }
  int upper() const { return reversed ? i : j; }
};

struct TransferResult {
  GridCluster cluster;
  SurgeryPlan plan;
  MeasureReport before;
  MeasureReport after;
  bool perimeter_decreased = false;
};

struct TermReport {
  std::string name;
  double measured = 0.0;
  double budget = 0.0;
  bool within = true;
};

struct TransferBound {
  double increment = 0.0;
  double K_required = 0.0;
  double bound = 0.0;
  bool holds = true;
  std::vector<TermReport> terms;
  double outside_residual = 0.0;  ///< change outside the closed cylinder, expected 0
};

// Interface point ----------------------------------------------------------

/// Flattest facet centroid on the (i,j) interface, with the orientation
/// condition checked and (i,j) swapped when only the swapped order meets it.
InterfacePoint find_interface_point(const GridCluster& cluster, int i, int j,
                                    double rho = 1e-3, const SurgeryOptions& options = {});

/// Orientation condition alone (EmptyInterface / ConditionViolated).
InterfacePoint orient_pair(const GridCluster& cluster, int i, int j);

/// Frame and cube centre for the facet nearest to x_bar (E_i below).
LocalFrame frame_at(const GridCluster& cluster, const Point& x_bar, int i, int j,
                    Index3* center_node = nullptr);
Box cube_box(const GridCluster& cluster, const LocalFrame& frame, const Index3& center, int n_a);

// Flatness and good set ---------------------------------------------------

FlatnessStats flatness_stats(const GridCluster& cluster, const Point& x_bar, int i, int j,
                             double a, double rho, double M = 1.0);
/// Same on a known frame and facet list (used inside the cube search).
FlatnessStats flatness_stats(const GridCluster& cluster, const std::vector<BoundaryFacet>& facets,
                             const LocalFrame& frame, const Box& cube, int i, int j, double rho,
                             double M);

GoodSetReport good_set(const GridCluster& cluster, const Point& x_bar, int i, int j, double a,
                       double rho);
GoodSetReport good_set(const GridCluster& cluster, const std::vector<BoundaryFacet>& facets,
                       const LocalFrame& frame, const Box& cube, int lower, int upper,
                       double rho);

// Plan ----------------------------------------------------------------------

/// Interface point, constants, cube search, good set.
SurgeryPlan plan_surgery(const GridCluster& cluster, const DensityField& field, int i, int j,
                         const SurgeryOptions& options = {},
                         std::optional<Point> x_bar = std::nullopt);

/// Sub-cube and strip selection for a given epsilon (sign selects the lower phase).
SurgeryPlan select_subcube_and_strips(const GridCluster& cluster, const SurgeryPlan& plan,
                                      double epsilon);

/// Builds the competitor and solves for delta. Epsilon is
/// added to plan.i, which is the requested j when the plan swapped the pair.
TransferResult transfer_volume(const GridCluster& cluster, const DensityField& field,
                               const SurgeryPlan& plan, double epsilon);

/// Total bound plus the individual terms.
TransferBound verify_transfer_bound(const GridCluster& before_cluster, const TransferResult& result,
                                    const DensityField& field);
/// Total bound only, from the two reports.
TransferBound verify_transfer_bound(const MeasureReport& before, const MeasureReport& after,
                                    double epsilon, const DensityField& field,
                                    const SurgeryPlan& plan);

/// C = 2^{N+3} N M^2 + 6.
double transfer_constant(int N, double M);
/// omega_hat: omega_x when positive, K^N / C^N otherwise.
double omega_hat(double omega_x, double K_user, int N, double M);

// Composition ---------------------------------------------------------------

struct ChainTransfer {
  int from = 0;  ///< loses epsilon
  int to = 0;    ///< gains epsilon
  Point x_bar{0.0, 0.0, 0.0};
  Ball ball;
  double increment = 0.0;
  double K_required = 0.0;
  bool bound_holds = true;
};

struct AdjustReport {
  int h = 0;
  double epsilon = 0.0;
  std::vector<int> chain;
  std::vector<ChainTransfer> transfers;
  std::vector<Ball> balls;
  double K0 = 0.0;
  double increment = 0.0;
  double bound = 0.0;  ///< m K0 |eps|^{(N-1)/N}
  bool bound_holds = true;
  MeasureReport before;
  MeasureReport after;
  bool perimeter_decreased = false;
};

/// Shortest chain h ~ ... ~ 0 in the discrete adjacency graph.
std::vector<int> adjacency_chain(const GridCluster& cluster, int h);

std::pair<GridCluster, AdjustReport> adjust_single_chamber(
    const GridCluster& cluster, const DensityField& field, int h, double epsilon,
    std::optional<Ball> excluded_ball = std::nullopt, const SurgeryOptions& options = {});

struct InBallReport {
  int i = 0;
  int j = 0;
  Ball ball;
  double epsilon = 0.0;
  double beta = 0.0;
  Point x_bar{0.0, 0.0, 0.0};
  int n_ell = 0;
  double delta = 0.0;
  double increment = 0.0;  ///< perimeter change inside the ball, symmetrised density
  double ratio = 0.0;      ///< increment / |eps|^beta
  bool confined = true;
  MeasureReport before;
  MeasureReport after;
};

std::pair<GridCluster, InBallReport> adjust_in_ball(const GridCluster& cluster,
                                                    const DensityField& field, int i, int j,
                                                    const Ball& ball, double epsilon);

}  // namespace epsbeta
