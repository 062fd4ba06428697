#include "qkdc/privstate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qkdc {

PrivateState::PrivateState(int K, std::vector<Mat> twist, DensityOperator shield)
    : K_(K), twist_(std::move(twist)), shield_(std::move(shield)) {
    if (K_ < 1) throw std::invalid_argument("PrivateState: K must be positive");
    if (static_cast<int>(twist_.size()) != K_ * K_)
        throw std::invalid_argument("PrivateState: twist must hold K^2 unitaries");
    const int ds = shield_.dim();
    for (const auto& u : twist_) {
        if (u.rows() != ds || u.cols() != ds) throw std::invalid_argument("PrivateState: twist has wrong shield dimension");
        if (!is_unitary(u, tol().hermitian)) throw std::invalid_argument("PrivateState: twist entry is not unitary");
    }
}

Dims PrivateState::dims() const {
    Dims d = {K_, K_};
    const auto& sd = shield_.dims();
    if (sd.size() == 2) {
        d.insert(d.end(), sd.begin(), sd.end());
    } else {
        d.push_back(shield_.dim());
    }
    return d;
}

Mat PrivateState::twisting_unitary() const {
    const int ds = shield_dim();
    const int n = K_ * K_ * ds;
    Mat u = Mat::Zero(n, n);
    for (int b = 0; b < K_ * K_; ++b) u.block(b * ds, b * ds, ds, ds) = twist_[b];
    return u;
}

DensityOperator PrivateState::state() const {
    Mat u = twisting_unitary();
    Mat g = u * kron(maximally_entangled(K_).matrix(), shield_.matrix()) * u.adjoint();
    return DensityOperator(hermitian_part(g), dims());
}

Mat PrivateState::test_projector() const {
    Mat u = twisting_unitary();
    const int ds = shield_dim();
    return hermitian_part(u * kron(maximally_entangled(K_).matrix(), Mat::Identity(ds, ds)) * u.adjoint());
}

std::vector<Mat> PrivateState::trivial_twist(int K, int shield_dim) {
    return std::vector<Mat>(K * K, Mat::Identity(shield_dim, shield_dim));
}

std::vector<Mat> PrivateState::random_twist(int K, int shield_dim, Rng& rng) {
    std::vector<Mat> t;
    t.reserve(K * K);
    for (int i = 0; i < K * K; ++i) t.push_back(haar_unitary(shield_dim, rng));
    return t;
}

DensityOperator build_private_state(int K, const std::vector<Mat>& twist, const DensityOperator& shield) {
    return PrivateState(K, twist, shield).state();
}

double privacy_test(const PrivateState& gamma, const DensityOperator& rho) {
    Mat pi = gamma.test_projector();
    if (rho.dim() != pi.rows()) throw std::invalid_argument("privacy_test: dimension mismatch");
    const Dims gd = gamma.dims();
    if (rho.num_systems() > 1 && dims_product(rho.dims()) == dims_product(gd) && rho.dims() != gd)
        throw std::invalid_argument("privacy_test: subsystem structure does not match [K, K, A', B']");
    return (pi * rho.matrix()).trace().real();
}

DensityOperator approximate_private_state(const PrivateState& gamma, double eps, const DensityOperator& junk) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("approximate_private_state: eps must lie in [0,1]");
    DensityOperator g = gamma.state();
    if (junk.dim() != g.dim()) throw std::invalid_argument("approximate_private_state: junk dimension mismatch");
    const double target = 1.0 - eps;
    auto mix = [&](double lam) { return Mat((1.0 - lam) * g.matrix() + lam * junk.matrix()); };
    if (fidelity(junk.matrix(), g.matrix()) > target) return approximate_private_state(gamma, eps);
    // sqrt(g) rho sqrt(g) has the nonzero spectrum of W^dag rho W, W = V_s sqrt(s) over the support of g,
    // so each bisection step only diagonalizes a rank(g) sized matrix
    Eigh eg = eigh(g.matrix());
    const double cut = 1e-14 * eg.values.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < eg.values.size(); ++i)
        if (eg.values(i) > cut) keep.push_back(i);
    Mat w(g.dim(), static_cast<Eigen::Index>(keep.size()));
    for (size_t c = 0; c < keep.size(); ++c) w.col(c) = eg.vectors.col(keep[c]) * std::sqrt(eg.values(keep[c]));
    const Mat wg = w.adjoint() * g.matrix() * w, wj = w.adjoint() * junk.matrix() * w;
    auto fid = [&](double lam) {
        Eigh e = eigh(hermitian_part((1.0 - lam) * wg + lam * wj));
        double f = 0.0;
        for (Eigen::Index i = 0; i < e.values.size(); ++i) f += std::sqrt(std::max(0.0, e.values(i)));
        return f * f;
    };
    // F is concave in the mixing weight and maximal at 0, hence non-increasing
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        double mid = 0.5 * (lo + hi);
        if (fid(mid) >= target) lo = mid;
        else hi = mid;
    }
    return DensityOperator(hermitian_part(mix(lo)), g.dims());
}

DensityOperator approximate_private_state(const PrivateState& gamma, double eps) {
    Mat pi = gamma.test_projector();
    const auto n = pi.rows();
    Mat q = Mat::Identity(n, n) - pi;
    DensityOperator junk(hermitian_part(q / q.trace().real()), gamma.dims());
    return approximate_private_state(gamma, eps, junk);
}

CqKeyState::CqKeyState(int K, DensityOperator joint) : K_(K), joint_(std::move(joint)) {
    if (joint_.num_systems() != 3 || joint_.dims()[0] != K_ || joint_.dims()[1] != K_)
        throw std::invalid_argument("CqKeyState: dims must be [K, K, dE]");
    const int de = joint_.dims()[2];
    const Mat& m = joint_.matrix();
    for (int a = 0; a < K_ * K_; ++a)
        for (int b = 0; b < K_ * K_; ++b) {
            if (a == b) continue;
            if (m.block(a * de, b * de, de, de).cwiseAbs().maxCoeff() > tol().hermitian)
                throw std::invalid_argument("CqKeyState: key registers are not classical");
        }
}

CqKeyState CqKeyState::from_blocks(int K, const std::vector<double>& pkl, const std::vector<Mat>& rho_e) {
    if (static_cast<int>(pkl.size()) != K * K || rho_e.size() != pkl.size())
        throw std::invalid_argument("CqKeyState::from_blocks: need K^2 probabilities and states");
    const int de = static_cast<int>(rho_e.front().rows());
    Mat m = Mat::Zero(K * K * de, K * K * de);
    for (int b = 0; b < K * K; ++b) {
        double tr = rho_e[b].trace().real();
        if (tr <= 0.0) throw std::invalid_argument("CqKeyState::from_blocks: zero-trace block");
        m.block(b * de, b * de, de, de) = pkl[b] * rho_e[b] / tr;
    }
    return CqKeyState(K, DensityOperator(m, {K, K, de}));
}

ConversionBounds definition_conversion_bounds(const CqKeyState& state) {
    const int K = state.K(), de = state.e_dim();
    const Mat& m = state.joint().matrix();
    auto block = [&](int k, int l) { return m.block((k * K + l) * de, (k * K + l) * de, de, de); };

    ConversionBounds r{};
    Mat rho_e = Mat::Zero(de, de);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
            rho_e += block(k, l);
            if (k != l) r.err += block(k, l).trace().real();
        }
    double sec = 0.0;
    for (int k = 0; k < K; ++k) {
        Mat rk = Mat::Zero(de, de);
        for (int l = 0; l < K; ++l) rk += block(k, l);
        sec += trace_distance(rk, rho_e / static_cast<double>(K));
    }
    r.sec = sec;
    // Phibar_KL (x) rho_E is block diagonal in the same basis
    Mat ideal = Mat::Zero(m.rows(), m.cols());
    for (int k = 0; k < K; ++k) ideal.block((k * K + k) * de, (k * K + k) * de, de, de) = rho_e / static_cast<double>(K);
    r.eta = std::max(0.0, 1.0 - fidelity(m, ideal));
    r.slack_combined = r.err + r.sec - (1.0 - std::sqrt(1.0 - r.eta));
    r.slack_err = std::sqrt(r.eta) - r.err;
    r.slack_sec = std::sqrt(r.eta) - r.sec;
    return r;
}

CqKeyState random_cq_key_state(int K, int dE, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::exponential_distribution<double> ex(1.0);
    const double a = u(rng), b = u(rng);
    std::vector<double> p(K * K);
    double s = 0.0;
    for (auto& x : p) s += (x = ex(rng));
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
            double& x = p[k * K + l];
            x = a * x / s + (1.0 - a) * (k == l ? 1.0 / K : 0.0);
        }
    Mat common = random_density(dE, rng).matrix();
    std::vector<Mat> es;
    for (int i = 0; i < K * K; ++i) es.push_back(b * random_density(dE, rng).matrix() + (1.0 - b) * common);
    return CqKeyState::from_blocks(K, p, es);
}

} // namespace qkdc
