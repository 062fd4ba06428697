#pragma once

#include "qkdc/bounds.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>

namespace qkdc {

// Extended precision keeps the near-pure covariance matrices at large mu well conditioned.
using LD = long double;
using Mat4L = Eigen::Matrix<LD, 4, 4>;
using Vec4L = Eigen::Matrix<LD, 4, 1>;
using Vec2L = Eigen::Matrix<LD, 2, 1>;

// Quadrature order (q1, q2, p1, p2); Omega = [[0, I], [-I, 0]]; vacuum variance 1/2.
Mat4L symplectic_form();

class TwoModeGaussianState {
public:
    explicit TwoModeGaussianState(const Mat4L& cov);

    const Mat4L& cov() const { return cov_; }
    const Vec4L& mean() const { return mean_; }
    // ascending
    Vec2L symplectic_eigenvalues() const;

private:
    Mat4L cov_;
    Vec4L mean_;
};

struct Williamson {
    Vec2L nu; // symplectic eigenvalues
    Mat4L S;  // cov = S diag(nu1, nu2, nu1, nu2) S^T, S symplectic
};

Williamson williamson(const Mat4L& cov);

enum class BosonicKind { thermal, amplifier, additive };

struct BosonicChannelParams {
    BosonicKind kind = BosonicKind::thermal;
    double eta = 1.0; // thermal
    double G = 1.0;   // amplifier
    double xi = 0.0;  // additive
    double NB = 0.0;  // environment photon number, omega = NB + 1/2

    void validate() const;
    bool entanglement_breaking() const;
    std::string label() const;
};

BosonicChannelParams pure_loss(double eta);
BosonicChannelParams quantum_limited_amplifier(double G);

TwoModeGaussianState tmsv_covariance(LD mu);
TwoModeGaussianState channel_on_covariance(const BosonicChannelParams& params, const TwoModeGaussianState& state, int mode);
// Channel output on mode 2 of the TMSV with energy mu.
TwoModeGaussianState channel_output(const BosonicChannelParams& params, LD mu);
TwoModeGaussianState separable_reference(const BosonicChannelParams& params, LD mu);

bool is_ppt_separable(const TwoModeGaussianState& state);

// D and V in bits and bits^2. Throws std::invalid_argument for a non-faithful sigma
// (or non-faithful rho for the variance).
std::pair<double, double> gaussian_rel_entropy_and_variance(const TwoModeGaussianState& rho,
                                                            const TwoModeGaussianState& sigma);

double thermal_entropy(double n_mean); // g(x) in bits
double asymptotic_bound(const BosonicChannelParams& params);
double family_variance(const BosonicChannelParams& params);
BoundReport finite_n_bound(const BosonicChannelParams& params, long n, double eps);

// D, V between output and separable reference at NB = delta, extrapolated to delta -> 0
// from delta in {1e-2, 1e-3, 1e-4}. V_samples decrease monotonically toward 0.
struct QuantumLimitedLimit {
    double D;
    double V;
    double D_samples[3];
    double V_samples[3];
};
QuantumLimitedLimit quantum_limited_limit(const BosonicChannelParams& params, LD mu);

} // namespace qkdc
