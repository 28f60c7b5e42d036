#pragma once

#include "driftlab/geometry.hpp"
#include "driftlab/spectral.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace driftlab {

enum class FlowBackend {
    /// Geometry from the closed-form family at every stage time.
    Analytic,
    /// Geometry integrated by RK4 in the truncated mode space.
    Galerkin,
};

std::string to_string(FlowBackend b);

struct FlowConfig {
    FlowBackend backend = FlowBackend::Galerkin;
    double dt = 1e-3;
    double max_dt = 0.05;
    /// Fourier cutoff K for circle fields and scalars.
    int mode_cutoff = 32;
    /// Step-doubling local error tolerance (relative to max(1, |y|)).
    double error_tolerance = 1e-9;
    /// Abort when the non-constant mode energy of a circle field grows by more than this factor.
    double stability_threshold = 1e8;
    Resolution resolution;
    /// Number of nonzero eigenvalues tracked at output times.
    int eigen_count = 3;
    double solver_tolerance = kDefaultSolverTolerance;
};

/// Circle grids used by the flow carry at least 4K nodes so quadratic terms
/// of degree-K fields are projected without aliasing.
int flow_grid_nodes(const FlowConfig& config);

struct FlowState {
    ContinuumState continuum;
    DiscreteWeightedManifold manifold;
    /// Soliton defect phi = g/2 - Hess f - Ric per axis: the coordinate
    /// component phi_ii at the axis nodes (the tensor is diagonal).
    std::vector<Eigen::VectorXd> defect;
    double volume = 0.0;

    double time() const { return continuum.time; }
};

/// Truncates circle fields to the mode cutoff, validates and samples the state.
FlowState make_flow_state(ContinuumState state, const FlowConfig& config);

/// Right-hand side of the flow at the axis nodes: g_t = 2 phi and
/// f_t = 1/2 - Delta_i f_i per factor.
struct FlowVelocity {
    std::vector<Eigen::VectorXd> metric_rate;
    std::vector<Eigen::VectorXd> weight_rate;
};

FlowVelocity flow_velocity(const FlowState& state);

/// One explicit RK4 step of the truncated flow. Throws FlowBreakdownError
/// when a metric loses positivity and StabilityError on mode-energy blow-up.
FlowState step_modified_flow(const FlowState& state, double dt, const FlowConfig& config);

/// A tracked scalar: a combination of eigenfunctions at t0 or an explicit
/// function of the node coordinates.
struct ScalarSpec {
    std::string label;
    std::vector<std::pair<int, double>> eigen_terms;
    std::function<double(std::span<const double>)> expression;
};

ScalarSpec eigen_scalar(std::vector<int> indices);
ScalarSpec expression_scalar(std::string label, std::function<double(std::span<const double>)> fn);

struct ScenarioSpec {
    std::string name = "scenario";
    std::optional<AnalyticFamily> family;
    std::optional<ContinuumState> initial_state;
    double t0 = 0.0;
    double horizon = 0.0;
    /// Spacing of output times (spectra); 0 outputs every internal step.
    double output_interval = 0.0;
    FlowConfig flow;
    std::vector<ScalarSpec> scalars;
};

struct TrajectorySample {
    double t = 0.0;
    FlowState state;
    /// Tracked scalars as node fields on state.manifold.
    std::vector<Field> scalars;
};

struct FlowTrajectory {
    ScenarioSpec spec;
    /// Uniform internal grid t0 = tau_0 < ... < tau_M = t0 + horizon.
    std::vector<TrajectorySample> samples;
    double step = 0.0;
    /// Indices into `samples` where spectra were computed.
    std::vector<std::size_t> output_indices;
    std::vector<SpectralResult> spectra;
    /// Gram-Schmidt mixing matrices per sample (empty when the scalars are degenerate).
    std::vector<Eigen::MatrixXd> mixing;
    /// Number of internal step halvings triggered by the error estimate.
    long rejected_steps = 0;

    double t0() const { return samples.front().t; }
    double t1() const { return samples.back().t; }
};

/// Integrates the scenario. Throws ConfigurationError for inconsistent specs
/// and propagates flow and solver errors.
FlowTrajectory run_flow(const ScenarioSpec& spec);

/// Node samples of a scalar along the trajectory's internal grid.
using ScalarSeries = std::vector<Field>;

/// Re-integrates u_t = L u + u/2 from u0 (node samples on the initial state)
/// with the same stage geometry as the trajectory.
ScalarSeries evolve_scalar(const Field& u0, const FlowTrajectory& traj);

struct FunctionalReport {
    std::vector<double> times;
    /// Per scalar series of I, E, F and H = integral |Hess u|^2 e^{-f}.
    std::vector<std::vector<double>> I, E, F, H;
    /// Max relative residual of J_ij' = J_ij - 2 D_ij (i != j) and I' = I - 2E.
    double max_pair_residual = 0.0;
    double max_energy_residual = 0.0;
    /// Max relative residual of E' = -2H and F' = -2H/I + F(2F - 1).
    double max_dirichlet_residual = 0.0;
    double max_quotient_residual = 0.0;
    /// Per time: max of the J/I relative residuals over scalars and pairs.
    std::vector<double> residual_IJ;
    /// Largest E_{i+1} - E_i relative to |E_i| (negative when strictly decreasing).
    double max_energy_increase = 0.0;
    /// Largest finite-difference F' - F(2F - 1).
    double max_quotient_excess = 0.0;
    double max_volume_drift = 0.0;
    /// Largest |integral u e^{-f}| over scalars that start mean-zero.
    double max_mean = 0.0;
};

FunctionalReport functional_residuals(const std::vector<ScalarSeries>& scalars, const FlowTrajectory& traj);
FunctionalReport functional_residuals(const FlowTrajectory& traj);

struct GramSchmidtFrame {
    std::vector<Field> frame;
    /// Lower-triangular a with frame_i = sum_j a_ij u_j.
    Eigen::MatrixXd mixing;
};

/// Throws DegeneracyError when the scalars are linearly dependent in weighted L^2.
GramSchmidtFrame gram_schmidt_frame(const std::vector<Field>& scalars, const FlowState& state);

struct CommutatorResidual {
    double absolute = 0.0;
    double relative = 0.0;
};

/// Weighted L^2 norm of d/dt(L u) - L u_t + 2 div_f(phi(grad u)) for u fixed in
/// coordinates, with d/dt by differences on the internal grid.
CommutatorResidual commutator_residual(const Field& u, const FlowTrajectory& traj, std::size_t index);

}  // namespace driftlab
