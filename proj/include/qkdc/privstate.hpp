#pragma once

#include "qkdc/qcore.hpp"

#include <vector>

namespace qkdc {

// gamma = U (Phi_AB (x) theta_A'B') U^dag with U = sum_ij |ij><ij| (x) U^{ij}.
// twist[i*K + j] acts on the shield A'B'.
class PrivateState {
public:
    PrivateState(int K, std::vector<Mat> twist, DensityOperator shield);

    int K() const { return K_; }
    const std::vector<Mat>& twist() const { return twist_; }
    const DensityOperator& shield() const { return shield_; }
    int shield_dim() const { return shield_.dim(); }
    // dims [K, K, dA', dB']
    Dims dims() const;

    Mat twisting_unitary() const;
    DensityOperator state() const;
    // U (Phi_AB (x) I) U^dag
    Mat test_projector() const;

    static std::vector<Mat> trivial_twist(int K, int shield_dim);
    static std::vector<Mat> random_twist(int K, int shield_dim, Rng& rng);

private:
    int K_;
    std::vector<Mat> twist_;
    DensityOperator shield_;
};

DensityOperator build_private_state(int K, const std::vector<Mat>& twist, const DensityOperator& shield);

// Tr Pi rho; rho must have dims [K, K, dA', dB'] (or a single matching dimension)
double privacy_test(const PrivateState& gamma, const DensityOperator& rho);

// rho = (1 - lambda) gamma + lambda junk with F(rho, gamma) = 1 - eps.
// junk defaults to a state orthogonal to the test projector.
DensityOperator approximate_private_state(const PrivateState& gamma, double eps, const DensityOperator& junk);
DensityOperator approximate_private_state(const PrivateState& gamma, double eps);

// Classical key K, classical guess L, quantum side information E; dims [K, K, dE].
class CqKeyState {
public:
    CqKeyState(int K, DensityOperator joint);

    int K() const { return K_; }
    int e_dim() const { return joint_.dims()[2]; }
    const DensityOperator& joint() const { return joint_; }

    // Build from p(k,l) and states rho_E^{k,l}; blocks indexed k*K + l.
    static CqKeyState from_blocks(int K, const std::vector<double>& pkl, const std::vector<Mat>& rho_e);

private:
    int K_;
    DensityOperator joint_;
};

struct ConversionBounds {
    double err;  // Pr{K != L}
    double sec;  // 1/2 || rho_KE - pi_K (x) rho_E ||_1
    double eta;  // 1 - F(rho_KLE, Phibar_KL (x) rho_E)
    double slack_combined; // err + sec - (1 - sqrt(1 - eta))
    double slack_err;      // sqrt(eta) - err
    double slack_sec;      // sqrt(eta) - sec
};

ConversionBounds definition_conversion_bounds(const CqKeyState& state);

CqKeyState random_cq_key_state(int K, int dE, Rng& rng);

} // namespace qkdc
