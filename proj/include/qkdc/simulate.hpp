#pragma once

#include "qkdc/qcore.hpp"

#include <string>
#include <vector>

namespace qkdc {

enum class ChannelKind { identity, dephasing, generalized_dephasing, erasure, measure_prepare, depolarizing };

struct ChannelFamily {
    ChannelKind kind = ChannelKind::identity;
    int d = 2;                // input dimension
    double gamma = 0.0;       // dephasing
    double p = 0.0;           // erasure / depolarizing
    std::vector<Vec> vectors; // |psi_x> (generalized dephasing) or |phi_x> (measure-prepare)
};

std::string to_string(ChannelKind k);
ChannelKind channel_kind_from_string(const std::string& s);

QuantumChannel make_channel(const ChannelFamily& spec);

// Discrete Weyl operators X^a Z^b, a,b in [0,d); for d=2 these are I, Z, X, XZ.
std::vector<Mat> weyl_operators(int d);
std::vector<Mat> pauli_group();

// Validated at construction: unitarity, the one-design property of the input
// representation, and covariance of the channel on a spanning set of inputs.
class CovariantChannelSpec {
public:
    CovariantChannelSpec(QuantumChannel channel, std::vector<Mat> group_in, std::vector<Mat> group_out);

    const QuantumChannel& channel() const { return ch_; }
    const std::vector<Mat>& group_in() const { return gin_; }
    const std::vector<Mat>& group_out() const { return gout_; }

    // d^2/|G| (U_g (x) I) Phi (U_g (x) I)^dag on R (x) A
    std::vector<Mat> povm() const;

private:
    QuantumChannel ch_;
    std::vector<Mat> gin_, gout_;
};

// Default covariance data for the families that have one (identity,
// dephasing, erasure, depolarizing).
CovariantChannelSpec covariant_spec(const ChannelFamily& family);

// Teleportation through the resource omega = (id (x) N)(Phi); input is a single system.
DensityOperator teleport_simulate(const CovariantChannelSpec& spec, const DensityOperator& input);
DensityOperator teleport_simulate(const QuantumChannel& ch, const CovariantChannelSpec& spec,
                                  const DensityOperator& input);

struct EbVerdict {
    bool entanglement_breaking; // Choi state is PPT
    bool exact;                 // PPT decides separability (or the verdict is negative)
};

EbVerdict is_entanglement_breaking(const QuantumChannel& ch);

} // namespace qkdc
