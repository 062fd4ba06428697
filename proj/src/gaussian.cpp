#include "qkdc/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <algorithm>
#include <limits>

namespace qkdc {

namespace {

constexpr LD kHalf = 0.5L;
constexpr double kLn2 = 0.69314718055994530942;

using Mat8L = Eigen::Matrix<LD, 8, 8>;

// g(x) = (x+1) ln(x+1) - x ln x
LD g_nat(LD x) {
    if (x <= 0.0L) return 0.0L;
    return (x + 1.0L) * std::log1p(x) - x * std::log(x);
}

LD beta_of(LD nu) {
    LD t = 2.0L * nu - 1.0L;
    if (!(t > 0.0L)) return std::numeric_limits<LD>::infinity();
    return std::log1p(2.0L / t);
}

Mat4L symplectic_inverse(const Mat4L& s) {
    const Mat4L om = symplectic_form();
    return -om * s.transpose() * om;
}

struct GibbsForm {
    Williamson w;
    Mat4L G;
    bool faithful;
};

GibbsForm gibbs(const Mat4L& cov) {
    GibbsForm gf{williamson(cov), Mat4L::Zero(), true};
    const LD floor = 1e-15L;
    Vec4L b;
    for (int k = 0; k < 2; ++k) {
        if (gf.w.nu(k) - kHalf <= floor) gf.faithful = false;
        b(k) = b(k + 2) = beta_of(gf.w.nu(k));
    }
    if (gf.faithful) {
        Mat4L si = symplectic_inverse(gf.w.S);
        gf.G = si.transpose() * b.asDiagonal() * si;
    }
    return gf;
}

void check_nonneg(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite and non-negative");
}

} // namespace

Mat4L symplectic_form() {
    Mat4L om = Mat4L::Zero();
    om(0, 2) = om(1, 3) = 1.0L;
    om(2, 0) = om(3, 1) = -1.0L;
    return om;
}

Williamson williamson(const Mat4L& cov) {
    Eigen::SelfAdjointEigenSolver<Mat4L> ev(cov);
    if (ev.info() != Eigen::Success || !(ev.eigenvalues()(0) > 0.0L))
        throw std::invalid_argument("williamson: covariance matrix must be positive definite");
    Vec4L sq = ev.eigenvalues().array().sqrt();
    Mat4L W = ev.eigenvectors() * sq.asDiagonal() * ev.eigenvectors().transpose();
    Mat4L Wi = ev.eigenvectors() * sq.cwiseInverse().asDiagonal() * ev.eigenvectors().transpose();
    Mat4L K = Wi * symplectic_form() * Wi;
    K = 0.5L * (K - K.transpose());
    Mat4L M = -K * K;
    M = 0.5L * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Mat4L> em(M);
    // eigenvalues 1/nu^2 come in pairs; the top pair belongs to the smaller nu
    Vec4L vs = em.eigenvectors().col(3);
    Vec4L ws = -K * vs;
    ws.normalize();
    Vec4L vl = Vec4L::Zero();
    for (int idx : {1, 0, 2}) {
        Vec4L c = em.eigenvectors().col(idx);
        c -= vs.dot(c) * vs;
        c -= ws.dot(c) * ws;
        if (c.norm() > 0.5L) {
            vl = c.normalized();
            break;
        }
    }
    Vec4L wl = -K * vl;
    wl.normalize();
    LD ls = vs.dot(M * vs), ll = vl.dot(M * vl);
    Williamson out;
    out.nu << 1.0L / std::sqrt(ls), 1.0L / std::sqrt(ll);
    Mat4L O;
    O.col(0) = vs;
    O.col(1) = vl;
    O.col(2) = ws;
    O.col(3) = wl;
    Vec4L n;
    n << 1.0L / std::sqrt(out.nu(0)), 1.0L / std::sqrt(out.nu(1)), 1.0L / std::sqrt(out.nu(0)), 1.0L / std::sqrt(out.nu(1));
    out.S = W * O * n.asDiagonal();
    return out;
}

TwoModeGaussianState::TwoModeGaussianState(const Mat4L& cov) : cov_(cov), mean_(Vec4L::Zero()) {
    LD asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= 1e-10L * std::max(1.0L, cov_.cwiseAbs().maxCoeff())))
        throw std::invalid_argument("covariance matrix must be symmetric");
    cov_ = 0.5L * (cov_ + cov_.transpose());
    // cov + (i/2) Omega >= 0, via its real 8x8 embedding
    Mat8L big;
    const Mat4L h = 0.5L * symplectic_form();
    big << cov_, -h, h, cov_;
    Eigen::SelfAdjointEigenSolver<Mat8L> es(big, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-10L) throw std::invalid_argument("covariance matrix violates the uncertainty relation");
}

Vec2L TwoModeGaussianState::symplectic_eigenvalues() const { return williamson(cov_).nu; }

void BosonicChannelParams::validate() const {
    check_nonneg(NB, "NB");
    switch (kind) {
    case BosonicKind::thermal:
        if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("thermal channel: eta must lie in [0,1]");
        break;
    case BosonicKind::amplifier:
        if (!(G >= 1.0) || !std::isfinite(G)) throw std::invalid_argument("amplifier channel: G must be >= 1");
        break;
    case BosonicKind::additive: check_nonneg(xi, "xi"); break;
    }
}

bool BosonicChannelParams::entanglement_breaking() const {
    switch (kind) {
    case BosonicKind::thermal: return (1.0 - eta) * NB >= eta;
    case BosonicKind::amplifier: return (G - 1.0) * NB >= 1.0;
    case BosonicKind::additive: return xi >= 1.0;
    }
    return false;
}

std::string BosonicChannelParams::label() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind) {
    case BosonicKind::thermal: os << "thermal(eta=" << eta << ",nb=" << NB << ")"; break;
    case BosonicKind::amplifier: os << "amplifier(G=" << G << ",nb=" << NB << ")"; break;
    case BosonicKind::additive: os << "additive(xi=" << xi << ")"; break;
    }
    return os.str();
}

BosonicChannelParams pure_loss(double eta) {
    BosonicChannelParams p;
    p.kind = BosonicKind::thermal;
    p.eta = eta;
    return p;
}

BosonicChannelParams quantum_limited_amplifier(double G) {
    BosonicChannelParams p;
    p.kind = BosonicKind::amplifier;
    p.G = G;
    return p;
}

TwoModeGaussianState tmsv_covariance(LD mu) {
    if (!(mu >= kHalf)) throw std::invalid_argument("tmsv_covariance: mu must be >= 1/2");
    LD c = std::sqrt((mu - kHalf) * (mu + kHalf));
    Mat4L v = Mat4L::Zero();
    v.diagonal().setConstant(mu);
    v(0, 1) = v(1, 0) = c;
    v(2, 3) = v(3, 2) = -c;
    return TwoModeGaussianState(v);
}

TwoModeGaussianState channel_on_covariance(const BosonicChannelParams& params, const TwoModeGaussianState& state, int mode) {
    params.validate();
    if (mode != 0 && mode != 1) throw std::invalid_argument("channel_on_covariance: mode must be 0 or 1");
    const LD omega = static_cast<LD>(params.NB) + kHalf;
    LD tau = 1.0L, y = 0.0L;
    switch (params.kind) {
    case BosonicKind::thermal:
        tau = params.eta;
        y = (1.0L - static_cast<LD>(params.eta)) * omega;
        break;
    case BosonicKind::amplifier:
        tau = params.G;
        y = (static_cast<LD>(params.G) - 1.0L) * omega;
        break;
    case BosonicKind::additive:
        tau = 1.0L;
        y = params.xi;
        break;
    }
    Vec4L x = Vec4L::Ones();
    x(mode) = x(mode + 2) = std::sqrt(tau);
    Mat4L v = x.asDiagonal() * state.cov() * x.asDiagonal();
    v(mode, mode) += y;
    v(mode + 2, mode + 2) += y;
    return TwoModeGaussianState(v);
}

TwoModeGaussianState channel_output(const BosonicChannelParams& params, LD mu) {
    return channel_on_covariance(params, tmsv_covariance(mu), 1);
}

TwoModeGaussianState separable_reference(const BosonicChannelParams& params, LD mu) {
    TwoModeGaussianState out = channel_output(params, mu);
    const LD a = out.cov()(0, 0), b = out.cov()(1, 1);
    const LD c = std::sqrt((a - kHalf) * (b - kHalf));
    Mat4L v = Mat4L::Zero();
    v(0, 0) = v(2, 2) = a;
    v(1, 1) = v(3, 3) = b;
    v(0, 1) = v(1, 0) = c;
    v(2, 3) = v(3, 2) = -c;
    TwoModeGaussianState s(v);
    if (!is_ppt_separable(s)) throw NumericalError("separable_reference: constructed state failed the PPT test");
    return s;
}

bool is_ppt_separable(const TwoModeGaussianState& state) {
    Vec4L flip(1.0L, 1.0L, 1.0L, -1.0L);
    Mat4L pt = flip.asDiagonal() * state.cov() * flip.asDiagonal();
    Mat8L big;
    const Mat4L h = 0.5L * symplectic_form();
    big << pt, -h, h, pt;
    Eigen::SelfAdjointEigenSolver<Mat8L> es(big, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0) >= -1e-10L;
}

std::pair<double, double> gaussian_rel_entropy_and_variance(const TwoModeGaussianState& rho,
                                                            const TwoModeGaussianState& sigma) {
    GibbsForm gs = gibbs(sigma.cov());
    if (!gs.faithful)
        throw std::invalid_argument("gaussian_rel_entropy_and_variance: sigma is not faithful (symplectic eigenvalue 1/2)");
    Williamson wr = williamson(rho.cov());
    LD s_rho = 0.0L, log_z = 0.0L;
    for (int k = 0; k < 2; ++k) {
        s_rho += g_nat(std::max(0.0L, wr.nu(k) - kHalf));
        LD ns = gs.w.nu(k);
        log_z += 0.5L * (std::log(ns - kHalf) + std::log(ns + kHalf));
    }
    LD d = -s_rho + 0.5L * (gs.G * rho.cov()).trace() + log_z;

    GibbsForm gr = gibbs(rho.cov());
    if (!gr.faithful)
        throw std::invalid_argument("gaussian_rel_entropy_and_variance: rho is not faithful; the variance is undefined here");
    const Mat4L delta = gr.G - gs.G;
    const Mat4L om = symplectic_form();
    Mat4L dv = delta * rho.cov();
    Mat4L dom = delta * om;
    LD var = 0.5L * (dv * dv).trace() + 0.125L * (dom * dom).trace();
    if (var < 0.0L) var = 0.0L;
    return {static_cast<double>(d) / kLn2, static_cast<double>(var) / (kLn2 * kLn2)};
}

double thermal_entropy(double n_mean) {
    check_nonneg(n_mean, "mean photon number");
    return static_cast<double>(g_nat(n_mean)) / kLn2;
}

double asymptotic_bound(const BosonicChannelParams& p) {
    p.validate();
    if (p.entanglement_breaking()) return 0.0;
    switch (p.kind) {
    case BosonicKind::thermal:
        if (p.eta == 1.0) return kInf;
        return -std::log2(1.0 - p.eta) - p.NB * std::log2(p.eta) - thermal_entropy(p.NB);
    case BosonicKind::amplifier:
        if (p.G == 1.0) return kInf;
        return (p.NB + 1.0) * std::log2(p.G) - std::log2(p.G - 1.0) - thermal_entropy(p.NB);
    case BosonicKind::additive:
        if (p.xi == 0.0) return kInf;
        return (p.xi - 1.0) / kLn2 - std::log2(p.xi);
    }
    return 0.0;
}

double family_variance(const BosonicChannelParams& p) {
    p.validate();
    switch (p.kind) {
    case BosonicKind::thermal: {
        if (p.NB == 0.0) return 0.0;
        double l = std::log2(p.eta * (p.NB + 1.0) / p.NB);
        return p.NB * (p.NB + 1.0) * l * l;
    }
    case BosonicKind::amplifier: {
        if (p.NB == 0.0) return 0.0;
        double l = std::log2((p.NB + 1.0) / (p.NB * p.G));
        return p.NB * (p.NB + 1.0) * l * l;
    }
    case BosonicKind::additive: return (1.0 - p.xi) * (1.0 - p.xi) / (kLn2 * kLn2);
    }
    return 0.0;
}

BoundReport finite_n_bound(const BosonicChannelParams& p, long n, double eps) {
    p.validate();
    if (n < 1) throw std::invalid_argument("finite_n_bound: n must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("finite_n_bound: eps must lie in (0,1)");
    const double nn = static_cast<double>(n);
    const bool tight = p.kind != BosonicKind::additive && p.NB == 0.0;
    double t1 = asymptotic_bound(p);
    double t2 = tight ? 0.0 : std::sqrt(2.0 * family_variance(p) / (nn * (1.0 - eps)));
    double t3 = chebyshev_constant(eps) / nn;
    BoundReport r;
    switch (p.kind) {
    case BosonicKind::thermal:
        r.family = tight ? "gaussian-pure-loss" : "gaussian-thermal";
        r.params = {{"eta", p.eta}, {"nb", p.NB}};
        break;
    case BosonicKind::amplifier:
        r.family = tight ? "gaussian-ql-amplifier" : "gaussian-amplifier";
        r.params = {{"G", p.G}, {"nb", p.NB}};
        break;
    case BosonicKind::additive:
        r.family = "gaussian-additive";
        r.params = {{"xi", p.xi}};
        break;
    }
    r.n = n;
    r.eps = eps;
    r.kind = BoundKind::converse;
    r.terms = {t1, t2, t3, "none (rigorous)"};
    r.value_bits = t1 + t2 + t3;
    r.infinite = std::isinf(r.value_bits);
    return r;
}

QuantumLimitedLimit quantum_limited_limit(const BosonicChannelParams& params, LD mu) {
    if (params.kind == BosonicKind::additive) throw std::invalid_argument("quantum_limited_limit: needs a thermal or amplifier family");
    const double deltas[3] = {1e-2, 1e-3, 1e-4};
    QuantumLimitedLimit out{};
    for (int i = 0; i < 3; ++i) {
        BosonicChannelParams q = params;
        q.NB = deltas[i];
        auto dv = gaussian_rel_entropy_and_variance(channel_output(q, mu), separable_reference(q, mu));
        out.D_samples[i] = dv.first;
        out.V_samples[i] = dv.second;
    }
    // Near delta = 0 the corrections go like delta ln delta (entropy term) and
    // delta ln^2 delta (variance); fit f0 + a b1(delta) + b b2(delta) through the three samples.
    auto extrap = [&](const double* f, auto b1, auto b2) {
        Eigen::Matrix3d A;
        Eigen::Vector3d y;
        for (int i = 0; i < 3; ++i) {
            A(i, 0) = 1.0;
            A(i, 1) = b1(deltas[i]);
            A(i, 2) = b2(deltas[i]);
            y(i) = f[i];
        }
        return A.fullPivLu().solve(y)(0);
    };
    auto lin = [](double d) { return d; };
    auto dlog = [](double d) { return d * std::log(d); };
    auto dlog2 = [](double d) { return d * std::log(d) * std::log(d); };
    out.D = extrap(out.D_samples, dlog, lin);
    out.V = std::max(0.0, extrap(out.V_samples, dlog2, dlog));
    return out;
}

} // namespace qkdc
