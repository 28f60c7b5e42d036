#pragma once

#include "driftlab/geometry.hpp"
#include "driftlab/spectral.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace driftlab {

/// Dense Kronecker assembly of the global forms, in the tensor modal basis
/// (first factor slowest).
struct GlobalForms {
    Eigen::MatrixXd stiffness;
    Eigen::MatrixXd mass;
};

GlobalForms kronecker_forms(const QuadraticForms& forms);

constexpr Eigen::Index kOracleMaxDimension = 2048;

/// Every generalized eigenvalue of the global pencil, ascending, by one dense
/// symmetric-definite solve. Throws OracleError when the mass form is not
/// positive definite and UsageError above kOracleMaxDimension.
std::vector<double> dense_spectrum(const QuadraticForms& forms);

/// RK4 solution of F' = (2F - 1) F, F(0) = F0, at s. Steps never exceed dt
/// and shrink as |F| grows. Throws HorizonError once |F| passes 1e12.
double integrate_equality_ode(double F0, double s, double dt);

/// Sum of samples * coordinate weights * e^{-f} * sqrt(det g).
double quadrature_integral(const Field& samples, const DiscreteWeightedManifold& dm);

/// Central differences in the interior, second-order one-sided at the ends.
std::vector<double> finite_diff_time_derivative(const std::vector<double>& series, double dt);

struct OracleReport {
    std::string name;
    std::string inputs_digest;
    std::vector<double> reference;
    std::vector<double> target;
    double abs_deviation = 0.0;
    double rel_deviation = 0.0;
};

/// 64-bit FNV-1a over the bytes of `data`, as 16 hex digits.
std::string fnv1a_hex(const void* data, std::size_t size);
std::string fnv1a_hex(const std::string& text);

/// Builds a report comparing `target` with `reference` entrywise; deviations
/// are maxima over entries; the relative one falls back to absolute at zero references.
OracleReport make_report(std::string name, const std::vector<double>& inputs, std::vector<double> reference,
                         std::vector<double> target);

}  // namespace driftlab
