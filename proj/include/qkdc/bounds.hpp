#pragma once

#include "qkdc/divergences.hpp"
#include "qkdc/qcore.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qkdc {

enum class BoundKind { converse, achievability, exact };

std::string to_string(BoundKind k);
BoundKind bound_kind_from_string(const std::string& s);

struct BoundTerms {
    double first = 0.0;
    double second = 0.0;
    double third = 0.0;
    std::string remainder_model;
};

struct BoundReport {
    std::string family;
    std::vector<std::pair<std::string, double>> params;
    long n = 1;
    double eps = 0.0;
    BoundKind kind = BoundKind::converse;
    double value_bits = 0.0;
    bool infinite = false;
    // true when value_bits is the sum of the three terms
    bool expansion = true;
    BoundTerms terms;
};

// Rounds to the given number of significant decimal digits.
double round_sig(double x, int digits = 12);
std::string format_number(double x, int digits = 12);

nlohmann::json to_json(const BoundReport& r, int digits = 12);
BoundReport report_from_json(const nlohmann::json& j);
std::string csv_header();
std::string to_csv_row(const BoundReport& r, int digits = 12);

// Standard normal distribution.
double normal_cdf(double x);
double inv_gaussian_cdf(double eps);

double binary_entropy(double x);     // bits
double dephasing_variance(double x); // bits^2, the variance paired with binary_entropy
double chebyshev_constant(double eps); // log 6 + 2 log((1+eps)/(1-eps))

BoundReport dephasing_boundary(double gamma, long n, double eps);

// Right-hand side of the erasure boundary equation at rate r.
double erasure_equation(double p, long n, double rate);
std::pair<double, double> erasure_feasible_interval(double p, long n);
BoundReport erasure_boundary(double p, long n, double eps);

double eb_bound(long n, double eps);
BoundReport eb_report(long n, double eps);

double chebyshev_dh_bound(double D, double V, double eps, long n);
BoundReport chebyshev_report(double D, double V, double eps, long n);

double second_order_rate(double D, double V, double eps, long n);
BoundReport second_order_report(double D, double V, double eps, long n);

// D_H^eps(N(psi) || tau) for one witness pair; tau must be PPT.
double meta_converse_point(const QuantumChannel& ch, const DensityOperator& input, const DensityOperator& sep_ref,
                           double eps);
// (1/ell) D_H^eps(N(psi)^{(x) ell} || tau^{(x) ell}) for ell in {1, 2}.
double meta_converse_rate(const QuantumChannel& ch, const DensityOperator& input, const DensityOperator& sep_ref,
                          double eps, int ell);

struct StrongConverseExponent {
    double exponent = 0.0;
    std::optional<double> prefactor_power; // |A'|^2 when supplied

    // min(1, n^power 2^{-n exponent})
    double fidelity_bound(long n) const;
};

StrongConverseExponent strong_converse_exponent(double rate, double renyi_ref, double alpha,
                                                std::optional<int> dims_penalty = std::nullopt);

enum class AchievabilityDirection { coherent, reverse };

BoundReport achievability_lower(const QuantumChannel& ch, const DensityOperator& input, double eps, long n,
                                AchievabilityDirection dir, const std::string& family = "channel");

double one_shot_distillation_rate(const DensityOperator& rho_ab, double eta);

// Report-layer clamp for rate interpretation of raw formulas.
double clamp_rate(double x);

} // namespace qkdc
