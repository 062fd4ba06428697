#include "qkdc/qcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qkdc {

const Tolerances& tol() {
    static const Tolerances t{};
    return t;
}

int dims_product(const Dims& dims) {
    long long p = 1;
    for (int d : dims) {
        if (d < 1) throw std::invalid_argument("subsystem dimension must be positive");
        p *= d;
    }
    return static_cast<int>(p);
}

namespace {

void require_square(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw std::invalid_argument("operator must be a non-empty square matrix");
}

// mixed-radix digits of idx, most significant first
void digits(int idx, const Dims& dims, std::vector<int>& out) {
    out.resize(dims.size());
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

int compose_index(const std::vector<int>& dig, const Dims& dims) {
    int idx = 0;
    for (size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + dig[k];
    return idx;
}

} // namespace

DensityOperator::DensityOperator(Mat matrix, Dims dims, TraceTag tag)
    : m_(std::move(matrix)), dims_(std::move(dims)), tag_(tag) {
    require_square(m_);
    if (dims_.empty()) dims_ = {static_cast<int>(m_.rows())};
    if (dims_product(dims_) != m_.rows())
        throw std::invalid_argument("subsystem dimensions do not match matrix size");
    const auto& t = tol();
    if (!is_hermitian(m_, t.hermitian)) throw std::invalid_argument("density operator is not Hermitian");
    m_ = hermitian_part(m_);
    // Cholesky of m + psd*I succeeds exactly when no eigenvalue is below -psd; eigenvalues only on failure
    Eigen::LLT<Mat> llt(m_ + t.psd * Mat::Identity(m_.rows(), m_.cols()));
    if (llt.info() != Eigen::Success && min_eigenvalue(m_) < -t.psd)
        throw std::invalid_argument("density operator has a negative eigenvalue");
    double tr = m_.trace().real();
    if (tag_ == TraceTag::normalized && std::abs(tr - 1.0) > t.trace)
        throw std::invalid_argument("density operator trace is not 1");
    if (tag_ == TraceTag::subnormalized && tr > 1.0 + t.trace)
        throw std::invalid_argument("subnormalized operator has trace above 1");
}

DensityOperator::DensityOperator(Mat matrix, TraceTag tag) : DensityOperator(std::move(matrix), Dims{}, tag) {}

QuantumChannel::QuantumChannel(std::vector<Mat> kraus, int in_dim, int out_dim)
    : kraus_(std::move(kraus)), in_(in_dim), out_(out_dim) {
    if (in_ < 1 || out_ < 1) throw std::invalid_argument("channel dimensions must be positive");
    if (kraus_.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
    Mat s = Mat::Zero(in_, in_);
    for (const auto& e : kraus_) {
        if (e.rows() != out_ || e.cols() != in_)
            throw std::invalid_argument("Kraus operator shape does not match channel dimensions");
        s += e.adjoint() * e;
    }
    double dev = (s - Mat::Identity(in_, in_)).cwiseAbs().maxCoeff();
    if (dev > tol().kraus) {
        std::ostringstream os;
        os << "Kraus operators are not complete (deviation " << dev << ")";
        throw std::invalid_argument(os.str());
    }
}

Mat QuantumChannel::apply(const Mat& rho) const {
    if (rho.rows() != in_) throw std::invalid_argument("channel input dimension mismatch");
    Mat out = Mat::Zero(out_, out_);
    for (const auto& e : kraus_) out += e * rho * e.adjoint();
    return out;
}

DensityOperator QuantumChannel::choi() const {
    return apply_channel(*this, maximally_entangled(in_), 1);
}

QuantumChannel QuantumChannel::identity(int d) {
    return QuantumChannel({Mat::Identity(d, d)}, d, d);
}

Mat hermitian_part(const Mat& a) { return 0.5 * (a + a.adjoint()); }

Eigh eigh(const Mat& a) {
    require_square(a);
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a));
    if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

Mat mat_func(const Mat& a, const std::function<double(double)>& f) {
    Eigh e = eigh(a);
    RVec fv = e.values.unaryExpr(f);
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

Mat mat_func_support(const Mat& a, const std::function<double(double)>& f) {
    Eigh e = eigh(a);
    double cut = tol().eig_clamp;
    RVec fv(e.values.size());
    for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = e.values(i) > cut ? f(e.values(i)) : 0.0;
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

Mat msqrt(const Mat& a) {
    return mat_func_support(a, [](double x) { return std::sqrt(x); });
}

Mat projector_support(const Mat& a) {
    Eigh e = eigh(a);
    double lmax = std::max(0.0, e.values.maxCoeff());
    double cut = std::max(tol().eig_clamp, tol().support_rel * lmax);
    RVec fv(e.values.size());
    for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = e.values(i) > cut ? 1.0 : 0.0;
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

double min_eigenvalue(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double max_eigenvalue(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double trace_norm(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues().sum();
}

bool is_hermitian(const Mat& a, double eps) {
    if (a.rows() != a.cols()) return false;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= eps;
}

bool is_psd(const Mat& a, double eps) { return is_hermitian(a, eps) && min_eigenvalue(a) >= -eps; }

bool is_unitary(const Mat& u, double eps) {
    if (u.rows() != u.cols()) return false;
    return (u.adjoint() * u - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= eps;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Mat kron_all(const std::vector<Mat>& ops) {
    if (ops.empty()) return Mat::Identity(1, 1);
    Mat out = ops.front();
    for (size_t k = 1; k < ops.size(); ++k) out = kron(out, ops[k]);
    return out;
}

Mat direct_sum(const Mat& a, const Mat& b) {
    Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

Mat partial_trace(const Mat& m, const Dims& dims, const std::vector<int>& keep) {
    require_square(m);
    const int n = static_cast<int>(dims.size());
    if (dims_product(dims) != m.rows()) throw std::invalid_argument("dims do not match matrix size");
    std::vector<bool> kept(n, false);
    for (int k : keep) {
        if (k < 0 || k >= n) throw std::invalid_argument("partial_trace: subsystem index out of range");
        if (kept[k]) throw std::invalid_argument("partial_trace: duplicate subsystem index");
        kept[k] = true;
    }
    Dims kd, td;
    for (int k = 0; k < n; ++k) (kept[k] ? kd : td).push_back(dims[k]);
    const int D = static_cast<int>(m.rows());
    std::vector<int> kidx(D), tidx(D), dig, kdig, tdig;
    for (int i = 0; i < D; ++i) {
        digits(i, dims, dig);
        kdig.clear();
        tdig.clear();
        for (int k = 0; k < n; ++k) (kept[k] ? kdig : tdig).push_back(dig[k]);
        kidx[i] = compose_index(kdig, kd);
        tidx[i] = compose_index(tdig, td);
    }
    const int dk = dims_product(kd);
    Mat out = Mat::Zero(dk, dk);
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j)
            if (tidx[i] == tidx[j]) out(kidx[i], kidx[j]) += m(i, j);
    return out;
}

DensityOperator partial_trace(const DensityOperator& state, const std::vector<int>& keep) {
    Mat r = partial_trace(state.matrix(), state.dims(), keep);
    Dims kd;
    std::vector<int> sorted = keep;
    std::sort(sorted.begin(), sorted.end());
    for (int k : sorted) kd.push_back(state.dims()[k]);
    if (kd.empty()) kd = {1};
    return DensityOperator(r, kd, state.tag());
}

Mat permute_systems(const Mat& m, const Dims& dims, const std::vector<int>& perm) {
    const int n = static_cast<int>(dims.size());
    if (static_cast<int>(perm.size()) != n) throw std::invalid_argument("permutation size mismatch");
    std::vector<int> seen(n, 0);
    for (int p : perm) {
        if (p < 0 || p >= n || seen[p]++) throw std::invalid_argument("invalid permutation");
    }
    Dims nd(n);
    for (int k = 0; k < n; ++k) nd[k] = dims[perm[k]];
    const int D = static_cast<int>(m.rows());
    std::vector<int> map(D), dig, ndig(n);
    for (int i = 0; i < D; ++i) {
        digits(i, dims, dig);
        for (int k = 0; k < n; ++k) ndig[k] = dig[perm[k]];
        map[i] = compose_index(ndig, nd);
    }
    Mat out(D, D);
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) out(map[i], map[j]) = m(i, j);
    return out;
}

DensityOperator permute_systems(const DensityOperator& state, const std::vector<int>& perm) {
    Mat r = permute_systems(state.matrix(), state.dims(), perm);
    Dims nd(perm.size());
    for (size_t k = 0; k < perm.size(); ++k) nd[k] = state.dims()[perm[k]];
    return DensityOperator(r, nd, state.tag());
}

Mat partial_transpose(const Mat& m, const Dims& dims, int sys) {
    const int n = static_cast<int>(dims.size());
    if (sys < 0 || sys >= n) throw std::invalid_argument("partial_transpose: subsystem index out of range");
    const int D = static_cast<int>(m.rows());
    Mat out(D, D);
    std::vector<int> di, dj;
    for (int i = 0; i < D; ++i) {
        digits(i, dims, di);
        for (int j = 0; j < D; ++j) {
            digits(j, dims, dj);
            std::swap(di[sys], dj[sys]);
            out(compose_index(di, dims), compose_index(dj, dims)) = m(i, j);
            std::swap(di[sys], dj[sys]);
        }
    }
    return out;
}

Mat apply_channel(const QuantumChannel& ch, const Mat& m, const Dims& dims, int on) {
    if (on < 0 || on >= static_cast<int>(dims.size()))
        throw std::invalid_argument("apply_channel: subsystem index out of range");
    if (dims[on] != ch.in_dim()) throw std::invalid_argument("apply_channel: dimension mismatch");
    int left = 1, right = 1;
    for (int k = 0; k < on; ++k) left *= dims[k];
    for (size_t k = on + 1; k < dims.size(); ++k) right *= dims[k];
    const Mat il = Mat::Identity(left, left), ir = Mat::Identity(right, right);
    const int dout = left * ch.out_dim() * right;
    Mat out = Mat::Zero(dout, dout);
    for (const auto& e : ch.kraus()) {
        Mat big = kron(kron(il, e), ir);
        out += big * m * big.adjoint();
    }
    return out;
}

DensityOperator apply_channel(const QuantumChannel& ch, const DensityOperator& state, int on) {
    Mat r = apply_channel(ch, state.matrix(), state.dims(), on);
    Dims nd = state.dims();
    nd[on] = ch.out_dim();
    return DensityOperator(r, nd, state.tag());
}

QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first) {
    if (first.out_dim() != second.in_dim()) throw std::invalid_argument("compose: dimension mismatch");
    std::vector<Mat> ks;
    for (const auto& b : second.kraus())
        for (const auto& a : first.kraus()) ks.push_back(b * a);
    return QuantumChannel(std::move(ks), first.in_dim(), second.out_dim());
}

namespace {

void require_psd_pair(const Mat& p, const Mat& q) {
    require_square(p);
    if (p.rows() != q.rows() || p.cols() != q.cols()) throw std::invalid_argument("dimension mismatch");
    const auto& t = tol();
    if (!is_psd(p, t.psd) || !is_psd(q, t.psd)) throw std::invalid_argument("operator is not positive semidefinite");
}

double root_fidelity(const Mat& p, const Mat& q) {
    Mat a = msqrt(p) * msqrt(q);
    return trace_norm(a);
}

} // namespace

double fidelity(const Mat& p, const Mat& q) {
    require_psd_pair(p, q);
    double f = root_fidelity(p, q);
    return f * f;
}

double fidelity(const DensityOperator& p, const DensityOperator& q) { return fidelity(p.matrix(), q.matrix()); }

double purified_distance(const DensityOperator& rho, const DensityOperator& sigma) {
    require_psd_pair(rho.matrix(), sigma.matrix());
    double tr = std::max(0.0, 1.0 - rho.trace());
    double ts = std::max(0.0, 1.0 - sigma.trace());
    double f = root_fidelity(rho.matrix(), sigma.matrix()) + std::sqrt(tr * ts);
    return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double trace_distance(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("dimension mismatch");
    Eigh e = eigh(a - b);
    return 0.5 * e.values.cwiseAbs().sum();
}

DensityOperator maximally_entangled(int d) {
    if (d < 1) throw std::invalid_argument("maximally_entangled: d must be positive");
    Vec v = Vec::Zero(d * d);
    for (int i = 0; i < d; ++i) v(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
    return DensityOperator(v * v.adjoint(), {d, d});
}

DensityOperator maximally_mixed(int d) {
    if (d < 1) throw std::invalid_argument("maximally_mixed: d must be positive");
    return DensityOperator(Mat::Identity(d, d) / static_cast<double>(d), {d});
}

DensityOperator pure_state(const Vec& psi, Dims dims) {
    double n = psi.norm();
    if (n == 0.0) throw std::invalid_argument("pure_state: zero vector");
    Vec v = psi / n;
    return DensityOperator(v * v.adjoint(), std::move(dims));
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    Dims d = a.dims();
    d.insert(d.end(), b.dims().begin(), b.dims().end());
    return DensityOperator(kron(a.matrix(), b.matrix()), d);
}

Mat haar_unitary(int d, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat z(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) z(i, j) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<Mat> qr(z);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        cplx ph = r(i, i) / std::abs(r(i, i));
        q.col(i) *= ph;
    }
    return q;
}

Vec haar_vector(int d, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = cplx(g(rng), g(rng));
    return v / v.norm();
}

DensityOperator random_density(int d, Rng& rng, int rank) {
    if (rank < 1) rank = d;
    std::normal_distribution<double> g(0.0, 1.0);
    Mat z(d, rank);
    for (int j = 0; j < rank; ++j)
        for (int i = 0; i < d; ++i) z(i, j) = cplx(g(rng), g(rng));
    Mat m = z * z.adjoint();
    m /= m.trace().real();
    return DensityOperator(hermitian_part(m), {d});
}

QuantumChannel random_channel(int din, int dout, int num_kraus, Rng& rng) {
    // Stinespring: a random isometry din -> dout*num_kraus sliced into blocks
    Mat u = haar_unitary(dout * num_kraus, rng);
    if (dout * num_kraus < din) throw std::invalid_argument("random_channel: too few Kraus operators");
    Mat iso = u.leftCols(din);
    std::vector<Mat> ks;
    for (int k = 0; k < num_kraus; ++k) ks.push_back(iso.block(k * dout, 0, dout, din));
    return QuantumChannel(std::move(ks), din, dout);
}

DensityOperator sample_separable(int dA, int dB, int terms, Rng& rng) {
    if (dA < 1 || dB < 1) throw std::invalid_argument("sample_separable: dimensions must be positive");
    if (terms < 1) throw std::invalid_argument("sample_separable: terms must be >= 1");
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> w(terms);
    for (auto& x : w) x = ex(rng);
    double s = std::accumulate(w.begin(), w.end(), 0.0);
    Mat m = Mat::Zero(dA * dB, dA * dB);
    for (int t = 0; t < terms; ++t) {
        Vec a = haar_vector(dA, rng), b = haar_vector(dB, rng);
        Vec ab(dA * dB);
        for (int i = 0; i < dA; ++i) ab.segment(i * dB, dB) = a(i) * b;
        m += (w[t] / s) * ab * ab.adjoint();
    }
    return DensityOperator(hermitian_part(m), {dA, dB});
}

DensityOperator sample_separable(int dA, int dB, int terms, std::uint64_t seed) {
    Rng rng(seed);
    return sample_separable(dA, dB, terms, rng);
}

bool is_ppt(const Mat& m, const Dims& dims, int sys, double eps) {
    return min_eigenvalue(partial_transpose(m, dims, sys)) >= -eps;
}

} // namespace qkdc
