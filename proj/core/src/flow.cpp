#include "driftlab/flow.hpp"

#include "driftlab/errors.hpp"
#include "driftlab/field_ops.hpp"
#include "driftlab/oracle.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace driftlab {

namespace {

// ---------------------------------------------------------------------------
// Packed joint state: per factor, circle -> [a modes | f modes], line -> [u];
// then one modal tensor per tracked scalar.

struct Layout {
    std::vector<AxisKind> kinds;
    std::vector<Eigen::Index> geometry_offset;
    Eigen::Index geometry_size = 0;
    std::vector<Eigen::Index> modal_shape;
    Eigen::Index scalar_size = 0;
    int scalars = 0;
    int modes = 0;  // 2K + 1
    int nodes = 0;  // flow grid nodes on circles
    int hermite = 0;

    Eigen::Index size() const { return geometry_size + scalars * scalar_size; }
    Eigen::Index scalar_offset(int s) const { return geometry_size + s * scalar_size; }
};

Layout make_layout(const ContinuumState& st, const FlowConfig& cfg, int scalars)
{
    Layout l;
    l.modes = 2 * cfg.mode_cutoff + 1;
    l.nodes = flow_grid_nodes(cfg);
    l.hermite = cfg.resolution.hermite_order;
    l.scalars = scalars;
    l.scalar_size = 1;
    for (const auto& f : st.factors) {
        l.geometry_offset.push_back(l.geometry_size);
        if (std::holds_alternative<CircleFactor>(f)) {
            l.kinds.push_back(AxisKind::Circle);
            l.geometry_size += 2 * l.modes;
            l.modal_shape.push_back(l.modes);
        } else {
            l.kinds.push_back(AxisKind::Line);
            l.geometry_size += 1;
            l.modal_shape.push_back(l.hermite);
        }
        l.scalar_size *= l.modal_shape.back();
    }
    return l;
}

void encode_geometry(const ContinuumState& st, const Layout& l, Eigen::VectorXd& y)
{
    const int K = (l.modes - 1) / 2;
    for (std::size_t i = 0; i < st.factors.size(); ++i) {
        const Eigen::Index o = l.geometry_offset[i];
        if (const auto* c = std::get_if<CircleFactor>(&st.factors[i])) {
            y.segment(o, l.modes) = c->metric.modal(K);
            y.segment(o + l.modes, l.modes) = c->weight.modal(K);
        } else {
            y[o] = std::get<GaussianLineFactor>(st.factors[i]).scale;
        }
    }
}

ContinuumState decode_geometry(const Eigen::VectorXd& y, const Layout& l, double t, double weight_constant)
{
    ContinuumState st;
    st.time = t;
    st.weight_constant = weight_constant;
    for (std::size_t i = 0; i < l.kinds.size(); ++i) {
        const Eigen::Index o = l.geometry_offset[i];
        if (l.kinds[i] == AxisKind::Circle) {
            st.factors.emplace_back(CircleFactor{TrigPolynomial::from_modal(y.segment(o, l.modes)),
                                                 TrigPolynomial::from_modal(y.segment(o + l.modes, l.modes))});
        } else {
            st.factors.emplace_back(GaussianLineFactor{y[o]});
        }
    }
    return st;
}

// Nodes -> modes |k| <= K with a round-off floor, so exactly constant samples
// give exactly zero non-constant coefficients.
Eigen::VectorXd project_modes(const AxisBasis& b, const Eigen::VectorXd& samples, int modes)
{
    Eigen::VectorXd c = b.analysis.topRows(modes) * samples;
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * samples.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 1; i < c.size(); ++i) {
        if (std::abs(c[i]) <= floor) c[i] = 0.0;
    }
    return c;
}

void check_positive(const ContinuumState& st, int nodes)
{
    for (std::size_t i = 0; i < st.factors.size(); ++i) {
        if (const auto* c = std::get_if<CircleFactor>(&st.factors[i])) {
            const Eigen::VectorXd a = c->metric.sample(nodes);
            Eigen::Index j = 0;
            const double amin = a.minCoeff(&j);
            if (!(amin > 0.0)) {
                throw FlowBreakdownError("circle metric lost positivity at node " + std::to_string(j) +
                                             " (a=" + std::to_string(amin) + ", t=" + std::to_string(st.time) + ")",
                                         static_cast<long>(j));
            }
        } else {
            const double u = std::get<GaussianLineFactor>(st.factors[i]).scale;
            if (!(u > 0.0) || !std::isfinite(u)) {
                throw FlowBreakdownError("line scale reached " + std::to_string(u) + " at t=" + std::to_string(st.time),
                                         -1);
            }
        }
    }
}

// Geometry rates in packed form.
void geometry_rate(const ContinuumState& st, const Layout& l, Eigen::VectorXd& dy)
{
    const auto basis = fourier_basis(l.nodes);
    for (std::size_t i = 0; i < st.factors.size(); ++i) {
        const Eigen::Index o = l.geometry_offset[i];
        if (const auto* c = std::get_if<CircleFactor>(&st.factors[i])) {
            const Eigen::ArrayXd a = c->metric.sample(l.nodes).array();
            const Eigen::ArrayXd a1 = c->metric.sample(l.nodes, 1).array();
            const Eigen::ArrayXd f1 = c->weight.sample(l.nodes, 1).array();
            const Eigen::ArrayXd f2 = c->weight.sample(l.nodes, 2).array();
            const Eigen::ArrayXd hess = f2 - a1 / (2.0 * a) * f1;
            dy.segment(o, l.modes) = project_modes(*basis, (a - 2.0 * hess).matrix(), l.modes);
            dy.segment(o + l.modes, l.modes) = project_modes(*basis, (0.5 - hess / a).matrix(), l.modes);
        } else {
            dy[o] = std::get<GaussianLineFactor>(st.factors[i]).scale - 1.0;
        }
    }
}

// Per-axis Galerkin generators A_i = -M_i^{-1} K_i in the scalar mode space.
std::vector<Eigen::MatrixXd> scalar_generators(const ContinuumState& st, const Layout& l)
{
    const DiscreteWeightedManifold dm = discretize(st, Resolution{l.nodes, l.hermite});
    std::vector<Eigen::MatrixXd> ops;
    for (int i = 0; i < dm.dimension(); ++i) {
        const auto* c = std::get_if<CircleFactor>(&st.factors[i]);
        if (c && c->metric.is_constant() && c->weight.is_constant()) {
            // Round circle: the modes diagonalize both forms, A = diag(-k^2 / a).
            const Eigen::VectorXi& order = dm.factor(i).basis->mode_order;
            Eigen::VectorXd d(l.modal_shape[i]);
            for (Eigen::Index m = 0; m < d.size(); ++m) d[m] = -static_cast<double>(order[m]) * order[m] / c->metric.cos_coeff(0);
            ops.push_back(d.asDiagonal());
            continue;
        }
        const FactorForms ff = assemble_factor_forms(dm.factor(i), static_cast<int>(l.modal_shape[i]));
        Eigen::LLT<Eigen::MatrixXd> llt(ff.mass);
        if (llt.info() != Eigen::Success) throw AssemblyError("flow mass form is not positive definite");
        ops.push_back(-llt.solve(ff.stiffness));
    }
    return ops;
}

double spectral_radius_estimate(const ContinuumState& st, const Layout& l)
{
    const int K = (l.modes - 1) / 2;
    double rho = 0.0;
    for (const auto& f : st.factors) {
        if (const auto* c = std::get_if<CircleFactor>(&f)) {
            rho += static_cast<double>(K) * K / c->metric.sample(l.nodes).minCoeff();
        } else {
            rho += (l.hermite - 1) / (2.0 * std::get<GaussianLineFactor>(f).scale);
        }
    }
    return rho + 0.5;
}

double mode_energy(const TrigPolynomial& p)
{
    double e = 0.0;
    for (int k = 1; k <= p.degree(); ++k) {
        e += static_cast<double>(k) * k * (p.cos_coeff(k) * p.cos_coeff(k) + p.sin_coeff(k) * p.sin_coeff(k));
    }
    return e;
}

class JointSystem {
public:
    JointSystem(const ScenarioSpec& spec, const ContinuumState& initial, int scalars)
        : spec_(spec), layout_(make_layout(initial, spec.flow, scalars)), weight_constant_(initial.weight_constant)
    {
        if (spec.flow.backend == FlowBackend::Analytic && !spec.family) {
            throw ConfigurationError("the analytic backend needs a closed-form family");
        }
    }

    const Layout& layout() const { return layout_; }

    ContinuumState geometry(double t, const Eigen::VectorXd& y) const
    {
        if (spec_.flow.backend == FlowBackend::Analytic) return spec_.family->evaluate(t);
        return decode_geometry(y, layout_, t, weight_constant_);
    }

    Eigen::VectorXd rhs(double t, const Eigen::VectorXd& y) const
    {
        const ContinuumState st = geometry(t, y);
        check_positive(st, layout_.nodes);
        Eigen::VectorXd dy = Eigen::VectorXd::Zero(y.size());
        if (spec_.flow.backend == FlowBackend::Galerkin) geometry_rate(st, layout_, dy);
        if (layout_.scalars > 0) {
            const auto ops = scalar_generators(st, layout_);
            for (int s = 0; s < layout_.scalars; ++s) {
                const Eigen::Index o = layout_.scalar_offset(s);
                const Eigen::VectorXd u = y.segment(o, layout_.scalar_size);
                Eigen::VectorXd du = 0.5 * u;
                for (std::size_t i = 0; i < ops.size(); ++i) {
                    du += apply_axis(layout_.modal_shape, ops[i], u, static_cast<int>(i));
                }
                dy.segment(o, layout_.scalar_size) = du;
            }
        }
        return dy;
    }

    Eigen::VectorXd rk4(double t, const Eigen::VectorXd& y, double h) const
    {
        const Eigen::VectorXd k1 = rhs(t, y);
        const Eigen::VectorXd k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        const Eigen::VectorXd k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        const Eigen::VectorXd k4 = rhs(t + h, y + h * k3);
        Eigen::VectorXd out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (spec_.flow.backend == FlowBackend::Analytic) encode_geometry(spec_.family->evaluate(t + h), layout_, out);
        return out;
    }

    // Step doubling: accept two half steps when they agree with the full step.
    Eigen::VectorXd advance(double t, const Eigen::VectorXd& y, double h, long& rejected, int depth = 0) const
    {
        const Eigen::VectorXd full = rk4(t, y, h);
        const Eigen::VectorXd mid = rk4(t, y, 0.5 * h);
        const Eigen::VectorXd two = rk4(t + 0.5 * h, mid, 0.5 * h);
        const double scale = std::max(1.0, two.cwiseAbs().maxCoeff());
        const double err = (two - full).cwiseAbs().maxCoeff() / (15.0 * scale);
        if (!std::isfinite(err)) throw StabilityError("non-finite values while integrating the flow");
        if (err > spec_.flow.error_tolerance && depth < 12) {
            ++rejected;
            const Eigen::VectorXd half = advance(t, y, 0.5 * h, rejected, depth + 1);
            return advance(t + 0.5 * h, half, 0.5 * h, rejected, depth + 1);
        }
        return two;
    }

private:
    const ScenarioSpec& spec_;
    Layout layout_;
    double weight_constant_;
};

void check_stability(const ContinuumState& st, const std::vector<double>& reference, double threshold)
{
    std::size_t c = 0;
    for (const auto& f : st.factors) {
        const auto* circle = std::get_if<CircleFactor>(&f);
        if (!circle) continue;
        const double e = mode_energy(circle->metric) + mode_energy(circle->weight);
        const double base = std::max(reference[c], 1e-20);
        if (!std::isfinite(e) || e > threshold * base) {
            throw StabilityError("circle mode energy grew from " + std::to_string(reference[c]) + " to " +
                                 std::to_string(e) + " by t=" + std::to_string(st.time) +
                                 "; shorten the horizon or lower the mode cutoff");
        }
        ++c;
    }
}

std::vector<double> circle_energies(const ContinuumState& st)
{
    std::vector<double> out;
    for (const auto& f : st.factors) {
        if (const auto* c = std::get_if<CircleFactor>(&f)) out.push_back(mode_energy(c->metric) + mode_energy(c->weight));
    }
    return out;
}

Field modal_to_nodes(const Layout& l, const DiscreteWeightedManifold& dm, const Eigen::VectorXd& coeffs)
{
    Eigen::VectorXd u = coeffs;
    std::vector<Eigen::Index> shape = l.modal_shape;
    for (int i = 0; i < dm.dimension(); ++i) {
        const auto& b = *dm.factor(i).basis;
        u = apply_axis(shape, b.eval.leftCols(shape[i]), u, i);
        shape[i] = b.node_count();
    }
    return u;
}

Eigen::VectorXd nodes_to_modal(const Layout& l, const DiscreteWeightedManifold& dm, const Field& u)
{
    Eigen::VectorXd c = u;
    std::vector<Eigen::Index> shape = dm.shape();
    for (int i = 0; i < dm.dimension(); ++i) {
        const auto& b = *dm.factor(i).basis;
        c = apply_axis(shape, b.analysis.topRows(l.modal_shape[i]), c, i);
        shape[i] = l.modal_shape[i];
    }
    return c;
}

double weighted_norm(const DiscreteWeightedManifold& dm, const Field& u)
{
    return std::sqrt(std::max(0.0, integrate(dm, u.cwiseAbs2())));
}

struct InternalRun {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> packed;
    double step = 0.0;
    long rejected = 0;
};

InternalRun integrate_joint(const ScenarioSpec& spec, const JointSystem& sys, const ContinuumState& initial,
                            const std::vector<Eigen::VectorXd>& scalar_modal)
{
    const auto& cfg = spec.flow;
    const Layout& l = sys.layout();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(l.size());
    encode_geometry(initial, l, y);
    for (int s = 0; s < l.scalars; ++s) y.segment(l.scalar_offset(s), l.scalar_size) = scalar_modal[s];

    InternalRun run;
    const long steps = spec.horizon > 0.0 ? static_cast<long>(std::ceil(spec.horizon / cfg.dt - 1e-9)) : 0;
    run.step = steps > 0 ? spec.horizon / steps : 0.0;
    run.times.push_back(spec.t0);
    run.packed.push_back(y);
    const std::vector<double> energy0 = circle_energies(initial);

    for (long n = 0; n < steps; ++n) {
        const double t = spec.t0 + n * run.step;
        const ContinuumState st = sys.geometry(t, y);
        const double rho = spectral_radius_estimate(st, l);
        const long sub = std::max(1L, static_cast<long>(std::ceil(run.step * rho / 2.5)));
        const double h = run.step / sub;
        for (long j = 0; j < sub; ++j) y = sys.advance(t + j * h, y, h, run.rejected);
        const double tn = n + 1 == steps ? spec.t0 + spec.horizon : spec.t0 + (n + 1) * run.step;
        const ContinuumState next = sys.geometry(tn, y);
        check_positive(next, l.nodes);
        check_stability(next, energy0, cfg.stability_threshold);
        run.times.push_back(tn);
        run.packed.push_back(y);
    }
    return run;
}

ContinuumState initial_state_of(const ScenarioSpec& spec)
{
    if (spec.family) return spec.family->evaluate(spec.t0);
    if (spec.initial_state) {
        ContinuumState st = *spec.initial_state;
        st.time = spec.t0;
        return st;
    }
    throw ConfigurationError("scenario '" + spec.name + "' has neither a family nor an initial state");
}

void validate_spec(const ScenarioSpec& spec)
{
    const auto& c = spec.flow;
    if (!(spec.horizon >= 0.0) || !std::isfinite(spec.horizon)) throw ConfigurationError("horizon must be finite and >= 0");
    if (!(c.dt > 0.0) || c.dt > c.max_dt) {
        throw ConfigurationError("dt must lie in (0, " + std::to_string(c.max_dt) + "]");
    }
    if (c.mode_cutoff < 1 || c.mode_cutoff > 256) throw ConfigurationError("mode cutoff must lie in [1, 256]");
    if (c.eigen_count < 1) throw ConfigurationError("eigen count must be >= 1");
    if (!(spec.output_interval >= 0.0)) throw ConfigurationError("output interval must be >= 0");
    if (!(c.error_tolerance > 0.0)) throw ConfigurationError("error tolerance must be positive");
}

}  // namespace

std::string to_string(FlowBackend b)
{
    return b == FlowBackend::Analytic ? "analytic" : "galerkin";
}

int flow_grid_nodes(const FlowConfig& config)
{
    return std::max(config.resolution.circle_nodes, 4 * config.mode_cutoff);
}

FlowState make_flow_state(ContinuumState state, const FlowConfig& config)
{
    for (auto& f : state.factors) {
        if (auto* c = std::get_if<CircleFactor>(&f)) {
            c->metric = c->metric.truncated(config.mode_cutoff);
            c->weight = c->weight.truncated(config.mode_cutoff);
        }
    }
    state.validate();
    FlowState fs;
    fs.manifold = discretize(state, Resolution{flow_grid_nodes(config), config.resolution.hermite_order});
    for (const auto& fac : fs.manifold.factors()) {
        const Eigen::VectorXd hess_f = fac.weight_d2 - fac.christoffel().cwiseProduct(fac.weight_d1);
        fs.defect.push_back(0.5 * fac.metric - hess_f);
    }
    fs.volume = fs.manifold.total_volume();
    fs.continuum = std::move(state);
    return fs;
}

FlowVelocity flow_velocity(const FlowState& state)
{
    FlowVelocity v;
    for (int i = 0; i < state.manifold.dimension(); ++i) {
        const auto& fac = state.manifold.factor(i);
        v.metric_rate.push_back(2.0 * state.defect[i]);
        const Eigen::VectorXd hess_f = fac.weight_d2 - fac.christoffel().cwiseProduct(fac.weight_d1);
        v.weight_rate.push_back((0.5 - hess_f.array() / fac.metric.array()).matrix());
    }
    return v;
}

FlowState step_modified_flow(const FlowState& state, double dt, const FlowConfig& config)
{
    if (!(dt > 0.0) || dt > config.max_dt) {
        throw ConfigurationError("step size must lie in (0, " + std::to_string(config.max_dt) + "]");
    }
    FlowConfig cfg = config;
    cfg.backend = FlowBackend::Galerkin;
    ScenarioSpec spec;
    spec.flow = cfg;
    const JointSystem sys(spec, state.continuum, 0);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(sys.layout().size());
    encode_geometry(state.continuum, sys.layout(), y);
    const Eigen::VectorXd next = sys.rk4(state.time(), y, dt);
    ContinuumState st = decode_geometry(next, sys.layout(), state.time() + dt, state.continuum.weight_constant);
    check_positive(st, sys.layout().nodes);
    check_stability(st, circle_energies(state.continuum), cfg.stability_threshold);
    return make_flow_state(std::move(st), cfg);
}

ScalarSpec eigen_scalar(std::vector<int> indices)
{
    ScalarSpec s;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) s.label += "+";
        s.label += std::to_string(indices[i]);
        s.eigen_terms.emplace_back(indices[i], 1.0);
    }
    return s;
}

ScalarSpec expression_scalar(std::string label, std::function<double(std::span<const double>)> fn)
{
    ScalarSpec s;
    s.label = std::move(label);
    s.expression = std::move(fn);
    return s;
}

namespace {

FlowTrajectory run_flow_impl(const ScenarioSpec& spec, const std::vector<Field>* explicit_scalars,
                             bool with_spectra)
{
    validate_spec(spec);
    FlowTrajectory traj;
    traj.spec = spec;
    ContinuumState initial = initial_state_of(spec);
    const FlowState first = make_flow_state(initial, spec.flow);
    initial = first.continuum;

    // Initial scalars as node fields on the flow grid.
    std::vector<Field> fields;
    if (explicit_scalars) {
        fields = *explicit_scalars;
    } else {
        const int max_index = [&] {
            int m = 0;
            for (const auto& s : spec.scalars) {
                for (const auto& [idx, c] : s.eigen_terms) m = std::max(m, idx);
            }
            return m;
        }();
        SpectralResult sr;
        if (max_index > 0) sr = lowest_eigenpairs(assemble_forms(first.manifold), max_index, spec.flow.solver_tolerance);
        for (const auto& s : spec.scalars) {
            Field u = Field::Zero(first.manifold.size());
            if (s.expression) u += first.manifold.sample(s.expression);
            for (const auto& [idx, c] : s.eigen_terms) {
                if (idx < 0) throw ConfigurationError("scalar eigen index must be >= 0");
                if (idx == 0) {
                    u += c * Field::Constant(first.manifold.size(), 1.0 / std::sqrt(first.volume));
                } else {
                    u += c * sr.eigenfunctions[idx];
                }
            }
            fields.push_back(std::move(u));
        }
    }

    const JointSystem sys(spec, initial, static_cast<int>(fields.size()));
    const Layout& l = sys.layout();
    std::vector<Eigen::VectorXd> modal;
    for (const auto& u : fields) {
        require_compatible(first.manifold, u, "tracked scalar");
        modal.push_back(nodes_to_modal(l, first.manifold, u));
    }

    const InternalRun run = integrate_joint(spec, sys, initial, modal);
    traj.step = run.step;
    traj.rejected_steps = run.rejected;
    for (std::size_t n = 0; n < run.times.size(); ++n) {
        TrajectorySample sample;
        sample.t = run.times[n];
        sample.state = n == 0 ? first : make_flow_state(sys.geometry(run.times[n], run.packed[n]), spec.flow);
        for (int s = 0; s < l.scalars; ++s) {
            sample.scalars.push_back(
                modal_to_nodes(l, sample.state.manifold, run.packed[n].segment(l.scalar_offset(s), l.scalar_size)));
        }
        traj.samples.push_back(std::move(sample));
    }

    const std::size_t last = traj.samples.size() - 1;
    std::size_t every = 1;
    if (spec.output_interval > 0.0 && run.step > 0.0) {
        every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.output_interval / run.step)));
    }
    for (std::size_t n = 0; n <= last; n += every) traj.output_indices.push_back(n);
    if (traj.output_indices.back() != last) traj.output_indices.push_back(last);

    if (with_spectra) {
        for (std::size_t idx : traj.output_indices) {
            const auto& st = traj.samples[idx].state;
            const QuadraticForms forms = assemble_forms(st.manifold);
            const int k = static_cast<int>(std::min<Eigen::Index>(spec.flow.eigen_count, forms.dimension() - 1));
            traj.spectra.push_back(lowest_eigenpairs(forms, k, spec.flow.solver_tolerance));
        }
        if (!fields.empty()) {
            try {
                for (const auto& s : traj.samples) traj.mixing.push_back(gram_schmidt_frame(s.scalars, s.state).mixing);
            } catch (const DegeneracyError&) {
                traj.mixing.clear();
            }
        }
    }
    return traj;
}

}  // namespace

FlowTrajectory run_flow(const ScenarioSpec& spec)
{
    return run_flow_impl(spec, nullptr, true);
}

ScalarSeries evolve_scalar(const Field& u0, const FlowTrajectory& traj)
{
    if (traj.samples.empty()) throw UsageError("evolve_scalar: empty trajectory");
    std::vector<Field> one{u0};
    const FlowTrajectory t = run_flow_impl(traj.spec, &one, false);
    ScalarSeries out;
    for (const auto& s : t.samples) out.push_back(s.scalars.front());
    return out;
}

FunctionalReport functional_residuals(const std::vector<ScalarSeries>& scalars, const FlowTrajectory& traj)
{
    FunctionalReport rep;
    const std::size_t n = traj.samples.size();
    for (const auto& s : traj.samples) rep.times.push_back(s.t);
    const double v0 = traj.samples.front().state.volume;
    for (const auto& s : traj.samples) {
        rep.max_volume_drift = std::max(rep.max_volume_drift, std::abs(s.state.volume - v0) / v0);
    }
    const std::size_t m = scalars.size();
    for (const auto& series : scalars) {
        if (series.size() != n) throw UsageError("functional_residuals: scalar series does not match the trajectory");
    }
    rep.I.assign(m, {});
    rep.E.assign(m, {});
    rep.F.assign(m, {});
    rep.H.assign(m, {});
    rep.residual_IJ.assign(n, 0.0);
    std::vector<std::vector<std::vector<double>>> J(m, std::vector<std::vector<double>>(m)),
        D(m, std::vector<std::vector<double>>(m));
    for (std::size_t j = 0; j < n; ++j) {
        const auto& dm = traj.samples[j].state.manifold;
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a; b < m; ++b) {
                const Pairings p = weighted_pairings(scalars[a][j], scalars[b][j], dm);
                J[a][b].push_back(p.J);
                D[a][b].push_back(p.D);
            }
            const double I = J[a][a].back();
            const double E = D[a][a].back();
            rep.I[a].push_back(I);
            rep.E[a].push_back(E);
            rep.F[a].push_back(I > 0.0 ? E / I : std::numeric_limits<double>::quiet_NaN());
            rep.H[a].push_back(hessian_norm_sq(scalars[a][j], dm));
        }
    }

    // Mean preservation for scalars that start mean-zero.
    for (std::size_t a = 0; a < m; ++a) {
        const auto& dm0 = traj.samples.front().state.manifold;
        const double scale = std::sqrt(std::max(rep.I[a][0], 0.0) * v0);
        if (std::abs(integrate(dm0, scalars[a][0])) > 1e-12 * std::max(scale, 1e-300)) continue;
        for (std::size_t j = 0; j < n; ++j) {
            rep.max_mean = std::max(rep.max_mean, std::abs(integrate(traj.samples[j].state.manifold, scalars[a][j])));
        }
    }

    if (n < 3 || !(traj.step > 0.0)) return rep;
    const double dt = traj.step;
    auto rel = [](double r, double scale) { return scale > 0.0 ? std::abs(r) / scale : std::abs(r); };
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            const auto d = finite_diff_time_derivative(J[a][b], dt);
            for (std::size_t j = 0; j < n; ++j) {
                const double r = d[j] - (J[a][b][j] - 2.0 * D[a][b][j]);
                double scale;
                if (a == b) {
                    scale = std::max({std::abs(J[a][a][j]), 2.0 * std::abs(D[a][a][j]), std::abs(d[j])});
                } else {
                    scale = std::sqrt(std::abs(J[a][a][j] * J[b][b][j]));
                }
                const double q = rel(r, scale);
                rep.residual_IJ[j] = std::max(rep.residual_IJ[j], q);
                if (a == b) rep.max_energy_residual = std::max(rep.max_energy_residual, q);
                else rep.max_pair_residual = std::max(rep.max_pair_residual, q);
            }
        }
        const auto dE = finite_diff_time_derivative(rep.E[a], dt);
        const auto dF = finite_diff_time_derivative(rep.F[a], dt);
        for (std::size_t j = 0; j < n; ++j) {
            const double H = rep.H[a][j];
            rep.max_dirichlet_residual =
                std::max(rep.max_dirichlet_residual, rel(dE[j] + 2.0 * H, std::max(std::abs(dE[j]), 2.0 * H)));
            const double F = rep.F[a][j];
            const double target = -2.0 * H / rep.I[a][j] + F * (2.0 * F - 1.0);
            rep.max_quotient_residual =
                std::max(rep.max_quotient_residual,
                         rel(dF[j] - target, std::max({std::abs(dF[j]), std::abs(target), 2.0 * H / rep.I[a][j]})));
            rep.max_quotient_excess = std::max(rep.max_quotient_excess, dF[j] - F * (2.0 * F - 1.0));
        }
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double e = rep.E[a][j];
            worst = std::max(worst, (rep.E[a][j + 1] - e) / std::max(std::abs(e), 1e-300));
        }
        rep.max_energy_increase = a == 0 ? worst : std::max(rep.max_energy_increase, worst);
    }
    return rep;
}

FunctionalReport functional_residuals(const FlowTrajectory& traj)
{
    std::vector<ScalarSeries> scalars;
    if (!traj.samples.empty()) {
        const std::size_t m = traj.samples.front().scalars.size();
        scalars.assign(m, {});
        for (const auto& s : traj.samples) {
            for (std::size_t a = 0; a < m; ++a) scalars[a].push_back(s.scalars[a]);
        }
    }
    return functional_residuals(scalars, traj);
}

GramSchmidtFrame gram_schmidt_frame(const std::vector<Field>& scalars, const FlowState& state)
{
    const auto& dm = state.manifold;
    const Eigen::Index m = static_cast<Eigen::Index>(scalars.size());
    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            gram(i, j) = gram(j, i) = weighted_pairings(scalars[i], scalars[j], dm).J;
        }
    }
    GramSchmidtFrame out;
    if (m == 0) {
        out.mixing.resize(0, 0);
        return out;
    }
    // Cholesky J = L L^T with an explicit pivot check.
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
    const double dmax = gram.diagonal().maxCoeff();
    for (Eigen::Index j = 0; j < m; ++j) {
        double d = gram(j, j) - L.row(j).head(j).squaredNorm();
        if (!(d > 1e-12 * dmax)) {
            throw DegeneracyError("scalar " + std::to_string(j) + " is linearly dependent on the previous ones");
        }
        L(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < m; ++i) {
            L(i, j) = (gram(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
        }
    }
    out.mixing = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m, m));
    for (Eigen::Index i = 0; i < m; ++i) {
        Field v = Field::Zero(dm.size());
        for (Eigen::Index j = 0; j <= i; ++j) v += out.mixing(i, j) * scalars[j];
        out.frame.push_back(std::move(v));
    }
    return out;
}

CommutatorResidual commutator_residual(const Field& u, const FlowTrajectory& traj, std::size_t index)
{
    const std::size_t n = traj.samples.size();
    if (index >= n) throw UsageError("commutator_residual: step index out of range");
    const auto& here = traj.samples[index].state;
    require_compatible(here.manifold, u, "commutator_residual");
    CommutatorResidual out;
    if (n < 3 || !(traj.step > 0.0)) return out;

    auto lu = [&](std::size_t j) { return drift_laplacian(traj.samples[j].state.manifold, u); };
    const double dt = traj.step;
    Field dlu;
    if (index == 0) {
        dlu = (-3.0 * lu(0) + 4.0 * lu(1) - lu(2)) / (2.0 * dt);
    } else if (index == n - 1) {
        dlu = (3.0 * lu(n - 1) - 4.0 * lu(n - 2) + lu(n - 3)) / (2.0 * dt);
    } else {
        dlu = (lu(index + 1) - lu(index - 1)) / (2.0 * dt);
    }

    const auto& dm = here.manifold;
    VectorField phi_grad(dm.dimension());
    for (int i = 0; i < dm.dimension(); ++i) {
        const auto& fac = dm.factor(i);
        const Field c = dm.broadcast(here.defect[i].cwiseQuotient(fac.metric.cwiseAbs2()), i);
        phi_grad[i] = c.cwiseProduct(partial(dm, u, i));
    }
    const Field div = drift_divergence(phi_grad, dm);
    const Field r = dlu + 2.0 * div;  // u_t = 0
    out.absolute = weighted_norm(dm, r);
    const double scale = std::max(weighted_norm(dm, dlu), 2.0 * weighted_norm(dm, div));
    out.relative = scale > 0.0 ? out.absolute / scale : out.absolute;
    return out;
}

}  // namespace driftlab
