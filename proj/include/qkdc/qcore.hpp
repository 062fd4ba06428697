#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkdc {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Dims = std::vector<int>;
using Rng = std::mt19937_64;

// Every numerical threshold used by the library lives here.
struct Tolerances {
    double hermitian = 1e-10;   // max |A - A^dag| entry
    double psd = 1e-10;         // min eigenvalue allowed
    double trace = 1e-10;
    double kraus = 1e-10;       // completeness
    double eig_clamp = 1e-12;   // eigenvalues below are zero for sqrt/log
    double support_rel = 1e-12; // kernel cutoff relative to lambda_max
    double support_weight = 1e-10;
    double covariance = 1e-9;   // group checks in simulate
    double symplectic = 1e-10;
};

const Tolerances& tol();

// Raised when an iterative method does not converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TraceTag { normalized, subnormalized };

int dims_product(const Dims& dims);

class DensityOperator {
public:
    DensityOperator(Mat matrix, Dims dims, TraceTag tag = TraceTag::normalized);
    explicit DensityOperator(Mat matrix, TraceTag tag = TraceTag::normalized);

    const Mat& matrix() const { return m_; }
    const Dims& dims() const { return dims_; }
    TraceTag tag() const { return tag_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    int num_systems() const { return static_cast<int>(dims_.size()); }
    double trace() const { return m_.trace().real(); }

private:
    Mat m_;
    Dims dims_;
    TraceTag tag_;
};

class QuantumChannel {
public:
    QuantumChannel(std::vector<Mat> kraus, int in_dim, int out_dim);

    const std::vector<Mat>& kraus() const { return kraus_; }
    int in_dim() const { return in_; }
    int out_dim() const { return out_; }

    Mat apply(const Mat& rho) const;
    // (id (x) N)(Phi), dims [in, out]
    DensityOperator choi() const;

    static QuantumChannel identity(int d);

private:
    std::vector<Mat> kraus_;
    int in_, out_;
};

// Hermitian eigendecomposition of (A + A^dag)/2, eigenvalues ascending.
struct Eigh {
    RVec values;
    Mat vectors;
};
Eigh eigh(const Mat& a);

Mat hermitian_part(const Mat& a);
Mat mat_func(const Mat& a, const std::function<double(double)>& f);
// f applied on eigenvalues above the clamp; zero on the rest
Mat mat_func_support(const Mat& a, const std::function<double(double)>& f);
Mat msqrt(const Mat& a);
Mat projector_support(const Mat& a);
double min_eigenvalue(const Mat& a);
double max_eigenvalue(const Mat& a);
double trace_norm(const Mat& a);

bool is_hermitian(const Mat& a, double eps);
bool is_psd(const Mat& a, double eps);
bool is_unitary(const Mat& u, double eps);

Mat kron(const Mat& a, const Mat& b);
Mat kron_all(const std::vector<Mat>& ops);
Mat direct_sum(const Mat& a, const Mat& b);

Mat partial_trace(const Mat& m, const Dims& dims, const std::vector<int>& keep);
DensityOperator partial_trace(const DensityOperator& state, const std::vector<int>& keep);

// Reorder tensor factors: output factor k is input factor perm[k].
Mat permute_systems(const Mat& m, const Dims& dims, const std::vector<int>& perm);
DensityOperator permute_systems(const DensityOperator& state, const std::vector<int>& perm);

Mat partial_transpose(const Mat& m, const Dims& dims, int sys);

Mat apply_channel(const QuantumChannel& ch, const Mat& m, const Dims& dims, int on);
DensityOperator apply_channel(const QuantumChannel& ch, const DensityOperator& state, int on);
QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first);

double fidelity(const Mat& p, const Mat& q);
double fidelity(const DensityOperator& p, const DensityOperator& q);
double purified_distance(const DensityOperator& rho, const DensityOperator& sigma);
double trace_distance(const Mat& a, const Mat& b);

DensityOperator maximally_entangled(int d);
DensityOperator maximally_mixed(int d);
DensityOperator pure_state(const Vec& psi, Dims dims = {});
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

// Random objects; all deterministic in the generator state.
Mat haar_unitary(int d, Rng& rng);
Vec haar_vector(int d, Rng& rng);
DensityOperator random_density(int d, Rng& rng, int rank = -1);
QuantumChannel random_channel(int din, int dout, int num_kraus, Rng& rng);

DensityOperator sample_separable(int dA, int dB, int terms, std::uint64_t seed);
DensityOperator sample_separable(int dA, int dB, int terms, Rng& rng);

bool is_ppt(const Mat& m, const Dims& dims, int sys, double eps);

} // namespace qkdc
