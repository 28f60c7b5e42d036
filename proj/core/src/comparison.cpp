#include "driftlab/comparison.hpp"

#include "driftlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace driftlab {

std::string to_string(BoundCase c)
{
    switch (c) {
        case BoundCase::BelowHalf: return "below_half";
        case BoundCase::AtHalf: return "at_half";
        case BoundCase::AboveHalf: return "above_half";
    }
    return "unknown";
}

double BoundCurve::operator()(double s) const
{
    return eigenvalue_bound(lambda0, s);
}

BoundCurve bound_curve(double lambda0)
{
    if (!(lambda0 > 0.0)) throw DomainError("eigenvalue bound needs lambda0 > 0");
    BoundCurve c;
    c.lambda0 = lambda0;
    c.bound_case = lambda0 < 0.5 ? BoundCase::BelowHalf : lambda0 == 0.5 ? BoundCase::AtHalf : BoundCase::AboveHalf;
    c.horizon = blowup_horizon(lambda0);
    return c;
}

double blowup_horizon(double lambda0)
{
    if (!(lambda0 > 0.0)) throw DomainError("blowup_horizon needs lambda0 > 0");
    if (lambda0 <= 0.5) return std::numeric_limits<double>::infinity();
    return -std::log1p(-0.5 / lambda0);
}

double eigenvalue_bound(double lambda0, double s)
{
    if (!(lambda0 > 0.0)) throw DomainError("eigenvalue bound needs lambda0 > 0");
    if (!(s >= 0.0)) throw DomainError("eigenvalue bound needs s >= 0");
    if (lambda0 == 0.5) return 0.5;
    const double horizon = blowup_horizon(lambda0);
    // 2 lambda0 (1 - e^s) + e^s = 1 + (1 - 2 lambda0)(e^s - 1)
    const double denom = 1.0 + (1.0 - 2.0 * lambda0) * std::expm1(s);
    if (s >= horizon || !(denom > 0.0)) {
        throw HorizonError("eigenvalue bound for lambda0=" + std::to_string(lambda0) + " is undefined at s=" +
                               std::to_string(s) + " (horizon " + std::to_string(horizon) + ")",
                           horizon);
    }
    return lambda0 / denom;
}

double linear_comparison(double h_a, double c, double s)
{
    return h_a + c * s;
}

double logistic_envelope(double h0, double s)
{
    if (!(h0 >= 0.0)) throw DomainError("logistic envelope needs h0 >= 0");
    if (!(s >= 0.0)) throw DomainError("logistic envelope needs s >= 0");
    if (h0 > 1.0) throw OutOfRegimeError("logistic envelope gives no forward bound for h0 > 1");
    if (h0 == 1.0) return 1.0;
    return h0 / (h0 + (1.0 - h0) * std::exp(s));
}

ForwardDiffVerdict forward_diff_check(const std::vector<double>& times, const std::vector<double>& values,
                                      const std::function<double(double, double)>& rhs, double slack)
{
    if (times.size() != values.size()) throw UsageError("forward_diff_check: times and values differ in length");
    if (values.size() < 3) throw UsageError("forward_diff_check needs at least 3 samples");
    ForwardDiffVerdict v;
    v.allowed_slack = slack;
    v.intervals = values.size() - 1;
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double dt = times[i + 1] - times[i];
        if (!(dt > 0.0)) throw UsageError("forward_diff_check needs strictly increasing times");
        const double q = (values[i + 1] - values[i]) / dt;
        const double g = std::max(rhs(times[i], values[i]), rhs(times[i + 1], values[i + 1]));
        const double excess = q - g;
        if (excess > worst) {
            worst = excess;
            v.worst_index = static_cast<long>(i);
        }
    }
    v.observed_slack = worst;
    v.passed = worst <= slack;
    return v;
}

}  // namespace driftlab
