#pragma once

#include <Eigen/Dense>

#include <vector>

namespace driftlab {

/// Real trigonometric polynomial on [0, 2pi):
///   p(theta) = c_0 + sum_{k=1..K} (c_k cos k theta + s_k sin k theta).
///
/// The modal layout used throughout the library is
///   [c_0, c_1, s_1, c_2, s_2, ..., c_K, s_K]   (length 2K + 1).
class TrigPolynomial {
public:
    TrigPolynomial() : cos_(1, 0.0), sin_(1, 0.0) {}

    static TrigPolynomial constant(double value);
    /// `cos_coeffs[k]` multiplies cos k theta; `sin_coeffs[k]` multiplies sin k
    /// theta (index 0 ignored). Shorter vector is zero padded.
    static TrigPolynomial from_coefficients(std::vector<double> cos_coeffs,
                                            std::vector<double> sin_coeffs);
    static TrigPolynomial from_modal(const Eigen::VectorXd& modal);

    int degree() const { return static_cast<int>(cos_.size()) - 1; }
    double cos_coeff(int k) const { return k <= degree() ? cos_[k] : 0.0; }
    double sin_coeff(int k) const { return (k >= 1 && k <= degree()) ? sin_[k] : 0.0; }

    /// True when every non-constant coefficient is exactly zero.
    bool is_constant() const;

    double operator()(double theta) const { return derivative_value(theta, 0); }
    /// Value of the `order`-th derivative at theta.
    double derivative_value(double theta, int order) const;

    TrigPolynomial derivative() const;
    TrigPolynomial truncated(int max_degree) const;
    TrigPolynomial plus_constant(double value) const;

    /// Samples of the `order`-th derivative at theta_j = 2 pi j / n.
    Eigen::VectorXd sample(int n, int order = 0) const;
    Eigen::VectorXd modal(int max_degree) const;

private:
    std::vector<double> cos_;
    std::vector<double> sin_;
};

}  // namespace driftlab
