#include "driftlab/geometry.hpp"

#include "driftlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace driftlab {

namespace {

// Lowest `count` values of the Minkowski sum of two ascending lists.
std::vector<double> minkowski_lowest(const std::vector<double>& a, const std::vector<double>& b,
                                     std::size_t count)
{
    std::vector<double> sums;
    sums.reserve(a.size() * b.size());
    for (double x : a) {
        for (double y : b) sums.push_back(x + y);
    }
    std::sort(sums.begin(), sums.end());
    if (sums.size() > count) sums.resize(count);
    return sums;
}

std::string fmt_double(double v)
{
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

int ContinuumState::circle_count() const
{
    return static_cast<int>(std::count_if(factors.begin(), factors.end(), [](const FactorState& f) {
        return std::holds_alternative<CircleFactor>(f);
    }));
}

void ContinuumState::validate() const
{
    if (factors.empty()) throw DomainError("state has no factors");
    if (!std::isfinite(weight_constant) || !std::isfinite(time)) {
        throw DomainError("state has a non-finite weight constant or time");
    }
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (const auto* line = std::get_if<GaussianLineFactor>(&factors[i])) {
            if (!(line->scale > 0.0) || !std::isfinite(line->scale)) {
                throw DomainError("line factor " + std::to_string(i) + " has non-positive scale " +
                                  fmt_double(line->scale));
            }
            continue;
        }
        const auto& circle = std::get<CircleFactor>(factors[i]);
        const int probe = 16 * (std::max(circle.metric.degree(), circle.weight.degree()) + 1) + 64;
        const Eigen::VectorXd a = circle.metric.sample(probe);
        const Eigen::VectorXd f = circle.weight.sample(probe);
        for (int j = 0; j < probe; ++j) {
            if (!(a[j] > 0.0)) {
                throw DomainError("circle factor " + std::to_string(i) + " metric is not positive at theta=" +
                                  fmt_double(2.0 * std::numbers::pi * j / probe));
            }
            if (!std::isfinite(f[j]) || !std::isfinite(a[j])) {
                throw DomainError("circle factor " + std::to_string(i) + " has non-finite samples");
            }
        }
    }
}

AnalyticFamily scaled_gaussian_family(double u0, int n, double t0)
{
    if (!(u0 > 0.0) || !std::isfinite(u0)) {
        throw DomainError("scaled Gaussian family needs u0 > 0, got " + fmt_double(u0));
    }
    if (n < 1) throw DomainError("scaled Gaussian family needs n >= 1");
    AnalyticFamily fam;
    fam.kind_ = AnalyticFamily::Kind::ScaledGaussian;
    fam.scale0_ = u0;
    fam.lines_ = n;
    fam.t0_ = t0;
    return fam;
}

AnalyticFamily round_circle_family(double a0, double t0, double f0)
{
    if (!(a0 > 0.0) || !std::isfinite(a0)) {
        throw DomainError("round circle family needs a0 > 0, got " + fmt_double(a0));
    }
    AnalyticFamily fam;
    fam.kind_ = AnalyticFamily::Kind::RoundCircle;
    fam.metric0_ = a0;
    fam.weight0_ = f0;
    fam.t0_ = t0;
    return fam;
}

AnalyticFamily product_family(std::vector<AnalyticFamily> factors)
{
    if (factors.empty()) throw ConfigurationError("product family needs at least one factor");
    AnalyticFamily fam;
    fam.kind_ = AnalyticFamily::Kind::Product;
    fam.t0_ = factors.front().reference_time();
    int circles = 0;
    for (auto& f : factors) {
        if (f.reference_time() != fam.t0_) {
            throw ConfigurationError("product factors have mismatched reference times " +
                                     fmt_double(fam.t0_) + " and " + fmt_double(f.reference_time()));
        }
        if (f.kind() == AnalyticFamily::Kind::Product) {
            for (auto& c : f.children_) fam.children_.push_back(c);
        } else {
            fam.children_.push_back(std::move(f));
        }
    }
    for (const auto& c : fam.children_) {
        if (c.kind() == AnalyticFamily::Kind::RoundCircle) ++circles;
    }
    if (circles > 1) throw ConfigurationError("product family supports at most one circle factor");
    return fam;
}

ContinuumState evaluate_family(const AnalyticFamily& family, double t)
{
    return family.evaluate(t);
}

int AnalyticFamily::dimension() const
{
    switch (kind_) {
        case Kind::ScaledGaussian: return lines_;
        case Kind::RoundCircle: return 1;
        case Kind::Product: {
            int n = 0;
            for (const auto& c : children_) n += c.dimension();
            return n;
        }
    }
    return 0;
}

double AnalyticFamily::extinction_time() const
{
    switch (kind_) {
        case Kind::ScaledGaussian:
            if (scale0_ < 1.0) return t0_ + std::log(1.0 / (1.0 - scale0_));
            return std::numeric_limits<double>::infinity();
        case Kind::RoundCircle: return std::numeric_limits<double>::infinity();
        case Kind::Product: {
            double t = std::numeric_limits<double>::infinity();
            for (const auto& c : children_) t = std::min(t, c.extinction_time());
            return t;
        }
    }
    return std::numeric_limits<double>::infinity();
}

void AnalyticFamily::append_factors(double t, ContinuumState& state) const
{
    switch (kind_) {
        case Kind::ScaledGaussian: {
            // u0 + (u0 - 1) expm1(s) == 1 + (u0 - 1) e^s, and exactly u0 at s = 0.
            const double u = scale0_ + (scale0_ - 1.0) * std::expm1(t - t0_);
            if (!(u > 0.0)) {
                const double te = extinction_time();
                throw ExtinctionError("scaled Gaussian family is extinct at t=" + fmt_double(t) +
                                          " (extinction time " + fmt_double(te) + ")",
                                      te);
            }
            for (int i = 0; i < lines_; ++i) state.factors.emplace_back(GaussianLineFactor{u});
            break;
        }
        case Kind::RoundCircle: {
            const double a = t == t0_ ? metric0_ : metric0_ * std::exp(t - t0_);
            const double f = weight0_ + 0.5 * (t - t0_);
            state.factors.emplace_back(CircleFactor{TrigPolynomial::constant(a), TrigPolynomial::constant(f)});
            break;
        }
        case Kind::Product:
            for (const auto& c : children_) c.append_factors(t, state);
            break;
    }
}

ContinuumState AnalyticFamily::evaluate(double t) const
{
    ContinuumState state;
    state.time = t;
    append_factors(t, state);
    return state;
}

std::vector<std::vector<double>> AnalyticFamily::factor_spectra(double t, int count) const
{
    std::vector<std::vector<double>> out;
    const ContinuumState state = evaluate(t);
    for (const auto& f : state.factors) {
        std::vector<double> spec;
        if (const auto* line = std::get_if<GaussianLineFactor>(&f)) {
            for (int k = 0; k < count; ++k) spec.push_back(k / (2.0 * line->scale));
        } else {
            const double a = std::get<CircleFactor>(f).metric.cos_coeff(0);
            spec.push_back(0.0);
            for (int k = 1; static_cast<int>(spec.size()) < count; ++k) {
                spec.push_back(k * k / a);
                spec.push_back(k * k / a);
            }
            spec.resize(count);
        }
        out.push_back(std::move(spec));
    }
    return out;
}

std::vector<double> AnalyticFamily::analytic_spectrum(double t, int count) const
{
    if (count < 1) return {};
    const auto spectra = factor_spectra(t, count);
    std::vector<double> acc = spectra.front();
    for (std::size_t i = 1; i < spectra.size(); ++i) {
        acc = minkowski_lowest(acc, spectra[i], static_cast<std::size_t>(count));
    }
    acc.resize(std::min<std::size_t>(acc.size(), count));
    return acc;
}

std::string AnalyticFamily::describe() const
{
    std::ostringstream os;
    os.precision(12);
    switch (kind_) {
        case Kind::ScaledGaussian:
            os << "ScaledGaussian(u0=" << scale0_ << ", n=" << lines_ << ", t0=" << t0_ << ")";
            break;
        case Kind::RoundCircle:
            os << "RoundCircle(a0=" << metric0_ << ", t0=" << t0_ << ")";
            break;
        case Kind::Product:
            os << "Product(";
            for (std::size_t i = 0; i < children_.size(); ++i) {
                if (i) os << ", ";
                os << children_[i].describe();
            }
            os << ")";
            break;
    }
    return os.str();
}

Eigen::VectorXd DiscreteFactor::density() const
{
    return ((-weight.array()).exp() * metric.array().sqrt()).matrix();
}

Eigen::VectorXd DiscreteFactor::measure() const
{
    // Reference weights already carry the reference density (e^{-x^2/4} on
    // lines), so divide it back out in log space to avoid overflow.
    const auto& b = *basis;
    return (b.reference_weights.array() * (-weight.array() - b.log_reference_density.array()).exp() *
            metric.array().sqrt())
        .matrix();
}

Eigen::VectorXd DiscreteFactor::christoffel() const
{
    return (metric_d1.array() / (2.0 * metric.array())).matrix();
}

DiscreteWeightedManifold::DiscreteWeightedManifold(std::vector<DiscreteFactor> factors, double weight_constant,
                                                   double time)
    : factors_(std::move(factors)), weight_constant_(weight_constant), time_(time)
{
    if (factors_.empty()) throw UsageError("discrete manifold needs at least one factor");
    shape_.resize(factors_.size());
    strides_.resize(factors_.size());
    size_ = 1;
    for (std::size_t i = factors_.size(); i-- > 0;) {
        const auto& f = factors_[i];
        const Eigen::Index n = f.size();
        if (f.metric.size() != n || f.metric_d1.size() != n || f.weight.size() != n ||
            f.weight_d1.size() != n || f.weight_d2.size() != n) {
            throw UsageError("factor " + std::to_string(i) + " samples do not match its basis");
        }
        shape_[i] = n;
        strides_[i] = size_;
        size_ *= n;
    }
}

Field DiscreteWeightedManifold::broadcast(const Eigen::VectorXd& axis_values, int axis) const
{
    const Eigen::Index stride = strides_.at(axis);
    const Eigen::Index n = shape_.at(axis);
    if (axis_values.size() != n) throw UsageError("broadcast: axis length mismatch");
    Field out(size_);
    for (Eigen::Index idx = 0; idx < size_; ++idx) out[idx] = axis_values[(idx / stride) % n];
    return out;
}

Field DiscreteWeightedManifold::sample(const std::function<double(std::span<const double>)>& fn) const
{
    Field out(size_);
    std::vector<double> coords(factors_.size());
    for (Eigen::Index idx = 0; idx < size_; ++idx) {
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            coords[i] = factors_[i].nodes()[(idx / strides_[i]) % shape_[i]];
        }
        out[idx] = fn(coords);
    }
    return out;
}

Field DiscreteWeightedManifold::measure() const
{
    Field out = Field::Constant(size_, std::exp(-weight_constant_));
    for (int i = 0; i < dimension(); ++i) out.array() *= broadcast(factors_[i].measure(), i).array();
    return out;
}

Field DiscreteWeightedManifold::weight() const
{
    Field out = Field::Constant(size_, weight_constant_);
    for (int i = 0; i < dimension(); ++i) out += broadcast(factors_[i].weight, i);
    return out;
}

double DiscreteWeightedManifold::total_volume() const
{
    double v = std::exp(-weight_constant_);
    for (const auto& f : factors_) v *= f.measure().sum();
    return v;
}

Field DiscreteWeightedManifold::ricci(int axis) const
{
    (void)factor(axis);
    return Field::Zero(size_);
}

Field DiscreteWeightedManifold::scalar_curvature() const
{
    return Field::Zero(size_);
}

DiscreteWeightedManifold discretize(const ContinuumState& state, const Resolution& resolution)
{
    if (state.factors.empty()) throw ConfigurationError("cannot discretize a state without factors");
    std::vector<DiscreteFactor> factors;
    factors.reserve(state.factors.size());
    for (const auto& fs : state.factors) {
        DiscreteFactor d;
        if (const auto* circle = std::get_if<CircleFactor>(&fs)) {
            if (resolution.circle_nodes < kMinCircleNodes) {
                throw ConfigurationError("circle resolution " + std::to_string(resolution.circle_nodes) +
                                         " is below the minimum of " + std::to_string(kMinCircleNodes));
            }
            const int n = resolution.circle_nodes;
            d.kind = AxisKind::Circle;
            d.basis = fourier_basis(n);
            d.metric = circle->metric.sample(n);
            d.metric_d1 = circle->metric.sample(n, 1);
            d.weight = circle->weight.sample(n);
            d.weight_d1 = circle->weight.sample(n, 1);
            d.weight_d2 = circle->weight.sample(n, 2);
        } else {
            const auto& line = std::get<GaussianLineFactor>(fs);
            if (resolution.hermite_order < kMinHermiteOrder) {
                throw ConfigurationError("Hermite order " + std::to_string(resolution.hermite_order) +
                                         " is below the minimum of " + std::to_string(kMinHermiteOrder));
            }
            d.kind = AxisKind::Line;
            d.basis = hermite_basis(resolution.hermite_order);
            d.scale = line.scale;
            const auto& x = d.basis->nodes;
            const Eigen::Index q = x.size();
            d.metric = Eigen::VectorXd::Constant(q, line.scale);
            d.metric_d1 = Eigen::VectorXd::Zero(q);
            d.weight = (0.25 * x.array().square() + 0.5 * std::log(line.scale)).matrix();
            d.weight_d1 = 0.5 * x;
            d.weight_d2 = Eigen::VectorXd::Constant(q, 0.5);
        }
        factors.push_back(std::move(d));
    }
    return DiscreteWeightedManifold(std::move(factors), state.weight_constant, state.time);
}

}  // namespace driftlab
