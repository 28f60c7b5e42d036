#include "driftlab/trig_polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace driftlab {

TrigPolynomial TrigPolynomial::constant(double value)
{
    TrigPolynomial p;
    p.cos_[0] = value;
    return p;
}

TrigPolynomial TrigPolynomial::from_coefficients(std::vector<double> cos_coeffs,
                                                 std::vector<double> sin_coeffs)
{
    const std::size_t n = std::max({cos_coeffs.size(), sin_coeffs.size(), std::size_t{1}});
    cos_coeffs.resize(n, 0.0);
    sin_coeffs.resize(n, 0.0);
    sin_coeffs[0] = 0.0;
    TrigPolynomial p;
    p.cos_ = std::move(cos_coeffs);
    p.sin_ = std::move(sin_coeffs);
    return p;
}

TrigPolynomial TrigPolynomial::from_modal(const Eigen::VectorXd& modal)
{
    const int degree = static_cast<int>((modal.size() - 1) / 2);
    std::vector<double> c(degree + 1, 0.0), s(degree + 1, 0.0);
    c[0] = modal.size() > 0 ? modal[0] : 0.0;
    for (int k = 1; k <= degree; ++k) {
        c[k] = modal[2 * k - 1];
        s[k] = modal[2 * k];
    }
    return from_coefficients(std::move(c), std::move(s));
}

bool TrigPolynomial::is_constant() const
{
    for (int k = 1; k <= degree(); ++k) {
        if (cos_[k] != 0.0 || sin_[k] != 0.0) return false;
    }
    return true;
}

double TrigPolynomial::derivative_value(double theta, int order) const
{
    // d^m/dtheta^m of cos(k theta) and sin(k theta) cycle through
    // (cos, -sin, -cos, sin) scaled by k^m.
    double sum = order == 0 ? cos_[0] : 0.0;
    for (int k = 1; k <= degree(); ++k) {
        if (cos_[k] == 0.0 && sin_[k] == 0.0) continue;
        const double scale = std::pow(static_cast<double>(k), order);
        const double c = std::cos(k * theta);
        const double s = std::sin(k * theta);
        double term = 0.0;
        switch (order % 4) {
            case 0: term = cos_[k] * c + sin_[k] * s; break;
            case 1: term = -cos_[k] * s + sin_[k] * c; break;
            case 2: term = -cos_[k] * c - sin_[k] * s; break;
            default: term = cos_[k] * s - sin_[k] * c; break;
        }
        sum += scale * term;
    }
    return sum;
}

TrigPolynomial TrigPolynomial::derivative() const
{
    std::vector<double> c(cos_.size(), 0.0), s(sin_.size(), 0.0);
    for (int k = 1; k <= degree(); ++k) {
        c[k] = k * sin_[k];
        s[k] = -k * cos_[k];
    }
    return from_coefficients(std::move(c), std::move(s));
}

TrigPolynomial TrigPolynomial::truncated(int max_degree) const
{
    const int d = std::min(degree(), std::max(max_degree, 0));
    std::vector<double> c(cos_.begin(), cos_.begin() + d + 1);
    std::vector<double> s(sin_.begin(), sin_.begin() + d + 1);
    return from_coefficients(std::move(c), std::move(s));
}

TrigPolynomial TrigPolynomial::plus_constant(double value) const
{
    TrigPolynomial p = *this;
    p.cos_[0] += value;
    return p;
}

Eigen::VectorXd TrigPolynomial::sample(int n, int order) const
{
    Eigen::VectorXd out(n);
    const double h = 2.0 * std::numbers::pi / n;
    for (int j = 0; j < n; ++j) out[j] = derivative_value(h * j, order);
    return out;
}

Eigen::VectorXd TrigPolynomial::modal(int max_degree) const
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * max_degree + 1);
    out[0] = cos_[0];
    for (int k = 1; k <= std::min(max_degree, degree()); ++k) {
        out[2 * k - 1] = cos_[k];
        out[2 * k] = sin_[k];
    }
    return out;
}

}  // namespace driftlab
