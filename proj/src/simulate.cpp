#include "qkdc/simulate.hpp"

#include <cmath>
#include <sstream>

namespace qkdc {

std::string to_string(ChannelKind k) {
    switch (k) {
    case ChannelKind::identity: return "identity";
    case ChannelKind::dephasing: return "dephasing";
    case ChannelKind::generalized_dephasing: return "generalized-dephasing";
    case ChannelKind::erasure: return "erasure";
    case ChannelKind::measure_prepare: return "measure-prepare";
    case ChannelKind::depolarizing: return "depolarizing";
    }
    return "unknown";
}

ChannelKind channel_kind_from_string(const std::string& s) {
    for (auto k : {ChannelKind::identity, ChannelKind::dephasing, ChannelKind::generalized_dephasing,
                   ChannelKind::erasure, ChannelKind::measure_prepare, ChannelKind::depolarizing})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown channel kind: " + s);
}

std::vector<Mat> weyl_operators(int d) {
    if (d < 1) throw std::invalid_argument("weyl_operators: d must be positive");
    const double pi = std::acos(-1.0);
    Mat x = Mat::Zero(d, d), z = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        x((i + 1) % d, i) = 1.0;
        z(i, i) = std::polar(1.0, 2.0 * pi * i / d);
    }
    std::vector<Mat> out;
    Mat xa = Mat::Identity(d, d);
    for (int a = 0; a < d; ++a) {
        Mat zb = Mat::Identity(d, d);
        for (int b = 0; b < d; ++b) {
            out.push_back(xa * zb);
            zb = zb * z;
        }
        xa = xa * x;
    }
    return out;
}

std::vector<Mat> pauli_group() {
    Mat i2 = Mat::Identity(2, 2), x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, cplx(0, -1), cplx(0, 1), 0;
    z << 1, 0, 0, -1;
    return {i2, x, y, z};
}

QuantumChannel make_channel(const ChannelFamily& spec) {
    const int d = spec.d;
    if (d < 1) throw std::invalid_argument("make_channel: dimension must be positive");
    auto in01 = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string("make_channel: ") + name + " must lie in [0,1]");
    };
    switch (spec.kind) {
    case ChannelKind::identity: return QuantumChannel::identity(d);
    case ChannelKind::dephasing: {
        in01(spec.gamma, "gamma");
        if (d != 2) throw std::invalid_argument("make_channel: dephasing is a qubit channel");
        Mat z(2, 2);
        z << 1, 0, 0, -1;
        return QuantumChannel({std::sqrt(1.0 - spec.gamma) * Mat::Identity(2, 2), std::sqrt(spec.gamma) * z}, 2, 2);
    }
    case ChannelKind::generalized_dephasing: {
        const auto& v = spec.vectors;
        if (static_cast<int>(v.size()) != d) throw std::invalid_argument("make_channel: need one environment vector per basis state");
        const auto de = v.front().size();
        std::vector<Mat> ks;
        for (Eigen::Index e = 0; e < de; ++e) {
            Mat k = Mat::Zero(d, d);
            for (int x = 0; x < d; ++x) {
                if (v[x].size() != de) throw std::invalid_argument("make_channel: environment vectors differ in length");
                if (std::abs(v[x].norm() - 1.0) > tol().kraus) throw std::invalid_argument("make_channel: environment vectors must be unit vectors");
                k(x, x) = std::conj(v[x](e));
            }
            ks.push_back(k);
        }
        return QuantumChannel(std::move(ks), d, d);
    }
    case ChannelKind::erasure: {
        in01(spec.p, "p");
        std::vector<Mat> ks;
        Mat k0 = Mat::Zero(d + 1, d);
        k0.topRows(d) = std::sqrt(1.0 - spec.p) * Mat::Identity(d, d);
        ks.push_back(k0);
        for (int i = 0; i < d; ++i) {
            Mat k = Mat::Zero(d + 1, d);
            k(d, i) = std::sqrt(spec.p);
            ks.push_back(k);
        }
        return QuantumChannel(std::move(ks), d, d + 1);
    }
    case ChannelKind::measure_prepare: {
        const auto& v = spec.vectors;
        if (static_cast<int>(v.size()) != d) throw std::invalid_argument("make_channel: need one prepared state per outcome");
        const auto dout = v.front().size();
        std::vector<Mat> ks;
        for (int x = 0; x < d; ++x) {
            if (v[x].size() != dout) throw std::invalid_argument("make_channel: prepared states differ in dimension");
            Mat k = Mat::Zero(dout, d);
            k.col(x) = v[x] / v[x].norm();
            ks.push_back(k);
        }
        return QuantumChannel(std::move(ks), d, static_cast<int>(dout));
    }
    case ChannelKind::depolarizing: {
        in01(spec.p, "p");
        auto w = weyl_operators(d);
        const double dd = static_cast<double>(d) * d;
        std::vector<Mat> ks;
        ks.push_back(std::sqrt(1.0 - spec.p + spec.p / dd) * w[0]);
        for (size_t i = 1; i < w.size(); ++i) ks.push_back(std::sqrt(spec.p / dd) * w[i]);
        return QuantumChannel(std::move(ks), d, d);
    }
    }
    throw std::invalid_argument("make_channel: unknown kind");
}

CovariantChannelSpec::CovariantChannelSpec(QuantumChannel channel, std::vector<Mat> group_in, std::vector<Mat> group_out)
    : ch_(std::move(channel)), gin_(std::move(group_in)), gout_(std::move(group_out)) {
    const double eps = tol().covariance;
    const int din = ch_.in_dim(), dout = ch_.out_dim();
    if (gin_.empty() || gin_.size() != gout_.size())
        throw std::invalid_argument("covariance: input and output representations must be non-empty and equally long");
    if (static_cast<int>(gin_.size()) < din * din)
        throw std::invalid_argument("covariance: group must have at least |A|^2 elements");
    for (size_t g = 0; g < gin_.size(); ++g) {
        if (gin_[g].rows() != din || !is_unitary(gin_[g], eps))
            throw std::invalid_argument("covariance: input representation is not unitary of the channel input dimension");
        if (gout_[g].rows() != dout || !is_unitary(gout_[g], eps))
            throw std::invalid_argument("covariance: output representation is not unitary of the channel output dimension");
    }
    const double G = static_cast<double>(gin_.size());
    for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j) {
            Mat x = Mat::Zero(din, din);
            x(i, j) = 1.0;
            Mat avg = Mat::Zero(din, din);
            for (const auto& u : gin_) avg += u * x * u.adjoint();
            avg /= G;
            Mat want = x.trace() * Mat::Identity(din, din) / static_cast<double>(din);
            if ((avg - want).cwiseAbs().maxCoeff() > eps) {
                std::ostringstream os;
                os << "covariance: input representation is not a one-design (matrix unit " << i << "," << j << ")";
                throw std::invalid_argument(os.str());
            }
            // linearity makes matrix units a sufficient test set for covariance
            Mat nx = ch_.apply(x);
            for (size_t g = 0; g < gin_.size(); ++g) {
                Mat lhs = ch_.apply(gin_[g] * x * gin_[g].adjoint());
                Mat rhs = gout_[g] * nx * gout_[g].adjoint();
                if ((lhs - rhs).cwiseAbs().maxCoeff() > eps) {
                    std::ostringstream os;
                    os << "covariance: channel is not covariant for group element " << g;
                    throw std::invalid_argument(os.str());
                }
            }
        }
    Mat s = Mat::Zero(din * din, din * din);
    for (const auto& e : povm()) s += e;
    if ((s - Mat::Identity(din * din, din * din)).cwiseAbs().maxCoeff() > eps)
        throw std::invalid_argument("covariance: teleportation POVM does not sum to the identity");
}

std::vector<Mat> CovariantChannelSpec::povm() const {
    const int d = ch_.in_dim();
    const Mat phi = maximally_entangled(d).matrix();
    const Mat id = Mat::Identity(d, d);
    const double scale = static_cast<double>(d) * d / static_cast<double>(gin_.size());
    std::vector<Mat> out;
    for (const auto& u : gin_) {
        Mat ug = kron(u, id);
        out.push_back(scale * ug * phi * ug.adjoint());
    }
    return out;
}

CovariantChannelSpec covariant_spec(const ChannelFamily& family) {
    QuantumChannel ch = make_channel(family);
    switch (family.kind) {
    case ChannelKind::identity:
    case ChannelKind::depolarizing: {
        auto w = family.d == 2 ? pauli_group() : weyl_operators(family.d);
        return CovariantChannelSpec(ch, w, w);
    }
    case ChannelKind::dephasing: {
        auto w = pauli_group();
        return CovariantChannelSpec(ch, w, w);
    }
    case ChannelKind::erasure: {
        auto w = family.d == 2 ? pauli_group() : weyl_operators(family.d);
        std::vector<Mat> out;
        for (const auto& u : w) out.push_back(direct_sum(u, Mat::Identity(1, 1)));
        return CovariantChannelSpec(ch, w, out);
    }
    default:
        throw std::invalid_argument("covariant_spec: no group representation known for " + to_string(family.kind));
    }
}

DensityOperator teleport_simulate(const CovariantChannelSpec& spec, const DensityOperator& input) {
    const QuantumChannel& ch = spec.channel();
    const int d = ch.in_dim(), dout = ch.out_dim();
    if (input.dim() != d) throw std::invalid_argument("teleport_simulate: input dimension mismatch");
    const Mat omega = ch.choi().matrix();
    const Mat x = kron(input.matrix(), omega); // R (x) A (x) B
    const Dims dims = {d, d, dout};
    const Mat ib = Mat::Identity(dout, dout);
    const auto povm = spec.povm();
    Mat out = Mat::Zero(dout, dout);
    for (size_t g = 0; g < povm.size(); ++g) {
        Mat post = partial_trace(Mat(kron(povm[g], ib) * x), dims, {2});
        const Mat& v = spec.group_out()[g];
        out += v * post * v.adjoint();
    }
    return DensityOperator(hermitian_part(out), {dout}, input.tag());
}

DensityOperator teleport_simulate(const QuantumChannel& ch, const CovariantChannelSpec& spec,
                                  const DensityOperator& input) {
    if (ch.in_dim() != spec.channel().in_dim() || ch.out_dim() != spec.channel().out_dim())
        throw std::invalid_argument("teleport_simulate: channel does not match the covariance data");
    Mat choi_diff = ch.choi().matrix() - spec.channel().choi().matrix();
    if (choi_diff.cwiseAbs().maxCoeff() > tol().covariance)
        throw std::invalid_argument("teleport_simulate: channel does not match the covariance data");
    return teleport_simulate(spec, input);
}

EbVerdict is_entanglement_breaking(const QuantumChannel& ch) {
    DensityOperator c = ch.choi();
    bool ppt = is_ppt(c.matrix(), c.dims(), 1, tol().psd);
    bool exact = !ppt || ch.in_dim() * ch.out_dim() <= 6;
    return {ppt, exact};
}

} // namespace qkdc
