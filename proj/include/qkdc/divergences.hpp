#pragma once

#include "qkdc/qcore.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace qkdc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct DivergenceResult {
    double value = 0.0; // bits, may be +inf
    std::optional<Mat> optimizer;
    int iterations = 0;
    double residual = 0.0;

    bool infinite() const { return value == kInf; }
};

// All values are reported in bits. Matrix overloads accept unnormalized
// positive semidefinite second arguments.
double von_neumann_entropy(const Mat& rho);

// Tr rho P_ker(sigma), with the kernel cut relative to lambda_max(sigma).
double kernel_weight(const Mat& rho, const Mat& sigma);

double rel_entropy(const Mat& rho, const Mat& sigma);
double rel_entropy(const DensityOperator& rho, const DensityOperator& sigma);

double rel_entropy_variance(const Mat& rho, const Mat& sigma);
double rel_entropy_variance(const DensityOperator& rho, const DensityOperator& sigma);

double sandwiched_renyi(const Mat& rho, const Mat& sigma, double alpha);
double sandwiched_renyi(const DensityOperator& rho, const DensityOperator& sigma, double alpha);

double max_relative_entropy(const Mat& rho, const Mat& sigma);
double max_relative_entropy(const DensityOperator& rho, const DensityOperator& sigma);

// Exact D_H^eps via the Neyman-Pearson threshold structure.
DivergenceResult hypothesis_test_divergence(const Mat& rho, const Mat& sigma, double eps);
DivergenceResult hypothesis_test_divergence(const DensityOperator& rho, const DensityOperator& sigma, double eps);

// D_H^eps(p^n || q^n) for commuting (classical) product states, by type classes.
double hypothesis_test_divergence_classical_iid(const std::vector<double>& p, const std::vector<double>& q,
                                                double eps, long n);

enum class Direction { a_to_b, b_to_a };

struct CoherentInfo {
    double info;     // I(A>B) or I(B>A)
    double variance; // matching variance
};

CoherentInfo coherent_info_and_variance(const DensityOperator& rho_ab, Direction dir = Direction::a_to_b);

struct MaxEntropyResult {
    double value;  // H_max(A|B) in bits
    Mat sigma_b;   // maximizer
    int iterations;
    double residual;
};

MaxEntropyResult conditional_max_entropy_detailed(const DensityOperator& rho_ab, int max_iter = 20000);
double conditional_max_entropy(const DensityOperator& rho_ab);

} // namespace qkdc
