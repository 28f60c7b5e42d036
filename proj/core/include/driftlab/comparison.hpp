#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace driftlab {

enum class BoundCase { BelowHalf, AtHalf, AboveHalf };

std::string to_string(BoundCase c);

/// Closed-form comparison curve s -> lambda0 / (2 lambda0 (1 - e^s) + e^s),
/// the solution of F' = (2F - 1) F with F(0) = lambda0.
struct BoundCurve {
    double lambda0 = 0.0;
    BoundCase bound_case = BoundCase::BelowHalf;
    /// Blow-up time in s; +inf unless lambda0 > 1/2.
    double horizon = std::numeric_limits<double>::infinity();

    double operator()(double s) const;
    bool valid_at(double s) const { return s >= 0.0 && s < horizon; }
};

BoundCurve bound_curve(double lambda0);

/// Throws DomainError for lambda0 <= 0 or s < 0 and HorizonError when s is at
/// or past the horizon.
double eigenvalue_bound(double lambda0, double s);

/// log(2 lambda0 / (2 lambda0 - 1)) when lambda0 > 1/2, otherwise +inf.
double blowup_horizon(double lambda0);

/// h_a + c s.
double linear_comparison(double h_a, double c, double s);

/// Upper envelope for h >= 0 with h' <= h (h - 1): the logistic solution
/// h0 / (h0 + (1 - h0) e^s), and 1 when h0 = 1. Throws OutOfRegimeError when h0 > 1.
double logistic_envelope(double h0, double s);

struct ForwardDiffVerdict {
    bool passed = true;
    /// Largest amount by which a quotient exceeded its bound (0 if none did).
    double observed_slack = 0.0;
    double allowed_slack = 0.0;
    /// Start index of the worst interval, -1 when every quotient is below its bound.
    long worst_index = -1;
    std::size_t intervals = 0;
};

/// Compares each forward quotient (h_{i+1} - h_i) / (t_{i+1} - t_i) with
/// max(G(t_i, h_i), G(t_{i+1}, h_{i+1})) + slack.
/// Throws UsageError with fewer than 3 samples or non-increasing times.
ForwardDiffVerdict forward_diff_check(const std::vector<double>& times, const std::vector<double>& values,
                                      const std::function<double(double, double)>& rhs, double slack = 0.0);

}  // namespace driftlab
