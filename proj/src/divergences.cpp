#include "qkdc/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qkdc {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

void require_same(const Mat& a, const Mat& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw std::invalid_argument("operators must be square and of equal dimension");
}

void require_state(const Mat& rho) {
    const auto& t = tol();
    if (!is_psd(rho, t.psd)) throw std::invalid_argument("first argument is not positive semidefinite");
}

void require_psd(const Mat& sigma) {
    if (!is_psd(sigma, tol().psd)) throw std::invalid_argument("second argument is not positive semidefinite");
}

double support_cut(const RVec& w) {
    double lmax = std::max(0.0, w.maxCoeff());
    return std::max(tol().eig_clamp, tol().support_rel * lmax);
}

// log of sigma restricted to its support (natural log), plus kernel projector
struct LogSupport {
    Mat log;
    Mat ker;
};

LogSupport log_support(const Mat& sigma) {
    Eigh e = eigh(sigma);
    double cut = support_cut(e.values);
    const auto n = e.values.size();
    RVec lv(n), kv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        bool in = e.values(i) > cut;
        lv(i) = in ? std::log(e.values(i)) : 0.0;
        kv(i) = in ? 0.0 : 1.0;
    }
    return {e.vectors * lv.asDiagonal() * e.vectors.adjoint(), e.vectors * kv.asDiagonal() * e.vectors.adjoint()};
}

double tr_prod(const Mat& a, const Mat& b) {
    // Tr(AB) without forming the product
    return (a.transpose().cwiseProduct(b)).sum().real();
}

Mat matrix_power_support(const Mat& a, double p) {
    Eigh e = eigh(a);
    double cut = support_cut(e.values);
    RVec v(e.values.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = e.values(i) > cut ? std::pow(e.values(i), p) : 0.0;
    return e.vectors * v.asDiagonal() * e.vectors.adjoint();
}

} // namespace

double von_neumann_entropy(const Mat& rho) {
    Eigh e = eigh(rho);
    double s = 0.0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
        double x = e.values(i);
        if (x > tol().eig_clamp) s -= x * std::log(x);
    }
    return s / kLn2;
}

double kernel_weight(const Mat& rho, const Mat& sigma) {
    require_same(rho, sigma);
    return tr_prod(log_support(sigma).ker, rho);
}

double rel_entropy(const Mat& rho, const Mat& sigma) {
    require_same(rho, sigma);
    require_state(rho);
    require_psd(sigma);
    LogSupport ls = log_support(sigma);
    if (tr_prod(ls.ker, rho) > tol().support_weight) return kInf;
    double neg_s = 0.0;
    Eigh er = eigh(rho);
    for (Eigen::Index i = 0; i < er.values.size(); ++i) {
        double x = er.values(i);
        if (x > tol().eig_clamp) neg_s += x * std::log(x);
    }
    double d = neg_s - tr_prod(rho, ls.log);
    return d / kLn2;
}

double rel_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
    return rel_entropy(rho.matrix(), sigma.matrix());
}

double rel_entropy_variance(const Mat& rho, const Mat& sigma) {
    require_same(rho, sigma);
    require_state(rho);
    require_psd(sigma);
    LogSupport ls = log_support(sigma);
    if (tr_prod(ls.ker, rho) > tol().support_weight)
        throw std::invalid_argument("rel_entropy_variance: support of rho not contained in support of sigma");
    Eigh er = eigh(rho);
    double tr = rho.trace().real();
    double m1 = 0.0, m2 = 0.0;
    for (Eigen::Index i = 0; i < er.values.size(); ++i) {
        double r = er.values(i);
        if (r <= tol().eig_clamp) continue;
        Vec u = er.vectors.col(i);
        Vec lu = std::log(r) * u - ls.log * u;
        m1 += r * u.dot(lu).real();
        m2 += r * lu.squaredNorm();
    }
    // normalize so the moments refer to the state rho/Tr rho
    m1 /= tr;
    m2 /= tr;
    double v = std::max(0.0, m2 - m1 * m1);
    return v / (kLn2 * kLn2);
}

double rel_entropy_variance(const DensityOperator& rho, const DensityOperator& sigma) {
    return rel_entropy_variance(rho.matrix(), sigma.matrix());
}

double sandwiched_renyi(const Mat& rho, const Mat& sigma, double alpha) {
    require_same(rho, sigma);
    require_state(rho);
    require_psd(sigma);
    if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha))
        throw std::invalid_argument("sandwiched_renyi: alpha must lie in (0,1) or (1,inf)");
    if (alpha > 1.0 && kernel_weight(rho, sigma) > tol().support_weight) return kInf;
    double gamma = (1.0 - alpha) / (2.0 * alpha);
    Mat sg = matrix_power_support(sigma, gamma);
    Eigh e = eigh(sg * rho * sg);
    double q = 0.0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
        double x = e.values(i);
        if (x > 0.0) q += std::pow(x, alpha);
    }
    if (q <= 0.0) return kInf;
    return std::log(q) / (alpha - 1.0) / kLn2;
}

double sandwiched_renyi(const DensityOperator& rho, const DensityOperator& sigma, double alpha) {
    return sandwiched_renyi(rho.matrix(), sigma.matrix(), alpha);
}

double max_relative_entropy(const Mat& rho, const Mat& sigma) {
    require_same(rho, sigma);
    require_state(rho);
    require_psd(sigma);
    if (kernel_weight(rho, sigma) > tol().support_weight) return kInf;
    Mat s = matrix_power_support(sigma, -0.5);
    return std::log(max_eigenvalue(s * rho * s)) / kLn2;
}

double max_relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
    return max_relative_entropy(rho.matrix(), sigma.matrix());
}

namespace {

struct NpTest {
    Mat proj;
    double pass; // Tr P rho
};

NpTest np_projector(const Mat& rho, const Mat& sigma, double t) {
    Eigh e = eigh(rho - t * sigma);
    const auto n = e.values.size();
    Mat p = Mat::Zero(n, n);
    double pass = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (e.values(i) > 0.0) {
            Vec v = e.vectors.col(i);
            p += v * v.adjoint();
            pass += v.dot(rho * v).real();
        }
    }
    return {p, pass};
}

} // namespace

DivergenceResult hypothesis_test_divergence(const Mat& rho, const Mat& sigma, double eps) {
    require_same(rho, sigma);
    require_state(rho);
    require_psd(sigma);
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("hypothesis_test_divergence: eps must lie in [0,1)");
    const double target = (1.0 - eps) * rho.trace().real();
    DivergenceResult res;

    LogSupport ls = log_support(sigma);
    double w0 = tr_prod(ls.ker, rho);
    if (w0 >= target - 1e-14) {
        res.value = kInf;
        res.optimizer = ls.ker;
        return res;
    }

    Eigh es = eigh(sigma);
    double cut = support_cut(es.values);
    double smin = kInf;
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
        if (es.values(i) > cut) smin = std::min(smin, es.values(i));
    double t_lo = 0.0;
    double t_hi = std::max(max_eigenvalue(rho), 1e-300) / smin;
    NpTest lo = np_projector(rho, sigma, t_lo);
    NpTest hi = np_projector(rho, sigma, t_hi);
    int expand = 0;
    while (hi.pass >= target) {
        t_lo = t_hi;
        lo = hi;
        t_hi *= 2.0;
        hi = np_projector(rho, sigma, t_hi);
        if (++expand > 2000) throw NumericalError("hypothesis_test_divergence: threshold bracket not found");
    }
    if (lo.pass < target) {
        // t = 0 can fail only through round-off on Tr P rho; use the support projector directly
        lo = {projector_support(rho), target};
    }
    int it = 0;
    for (; it < 200; ++it) {
        if (t_hi - t_lo <= 1e-13 * t_hi) break;
        double tm = 0.5 * (t_lo + t_hi);
        NpTest mid = np_projector(rho, sigma, tm);
        if (mid.pass >= target) {
            t_lo = tm;
            lo = std::move(mid);
        } else {
            t_hi = tm;
            hi = std::move(mid);
        }
    }
    double gap = lo.pass - hi.pass;
    double w = gap > 0.0 ? (target - hi.pass) / gap : 1.0;
    w = std::clamp(w, 0.0, 1.0);
    Mat lam = (1.0 - w) * hi.proj + w * lo.proj;
    double beta = tr_prod(lam, sigma);
    res.iterations = it;
    res.residual = std::abs(tr_prod(lam, rho) - target);
    res.value = beta > 0.0 ? -std::log(beta) / kLn2 : kInf;
    res.optimizer = std::move(lam);
    return res;
}

DivergenceResult hypothesis_test_divergence(const DensityOperator& rho, const DensityOperator& sigma, double eps) {
    return hypothesis_test_divergence(rho.matrix(), sigma.matrix(), eps);
}

double hypothesis_test_divergence_classical_iid(const std::vector<double>& p, const std::vector<double>& q,
                                                double eps, long n) {
    if (p.size() != q.size() || p.empty()) throw std::invalid_argument("p and q must have equal nonzero length");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in [0,1)");
    auto check = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) {
            if (!(x >= 0.0)) throw std::invalid_argument("probabilities must be non-negative");
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-10) throw std::invalid_argument("probabilities must sum to 1");
    };
    check(p);
    check(q);

    // symbols with p_i = 0 never enter a useful test; symbols with q_i = 0 cost nothing
    struct Sym {
        double lp, lq;
    };
    std::vector<Sym> syms;
    double p_free = 0.0; // mass of p on {q = 0}
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) {
            p_free += p[i];
            continue;
        }
        syms.push_back({std::log(p[i]), std::log(q[i])});
    }
    // Sequences containing any q=0 symbol: P mass 1-(1-p_free)^n, Q mass 0.
    const double target = 1.0 - eps;
    double free_mass = -std::expm1(static_cast<double>(n) * std::log1p(-p_free));
    if (p_free >= 1.0) free_mass = 1.0;
    if (free_mass >= target) return kInf;
    if (syms.empty()) return kInf;

    const int m = static_cast<int>(syms.size());
    // number of compositions of n into m parts
    double log_count = std::lgamma(n + m) - std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(m));
    if (log_count > std::log(2e7)) throw std::invalid_argument("classical oracle: too many type classes");

    struct Cls {
        double llr, lp, lq;
    };
    std::vector<Cls> cls;
    std::vector<long> comp(m, 0);
    const double lgn = std::lgamma(n + 1.0);
    std::function<void(int, long)> rec = [&](int k, long left) {
        if (k == m - 1) {
            comp[k] = left;
            double lm = lgn, lp = 0.0, lq = 0.0;
            for (int i = 0; i < m; ++i) {
                lm -= std::lgamma(comp[i] + 1.0);
                lp += comp[i] * syms[i].lp;
                lq += comp[i] * syms[i].lq;
            }
            cls.push_back({lp - lq, lm + lp, lm + lq});
            return;
        }
        for (long c = 0; c <= left; ++c) {
            comp[k] = c;
            rec(k + 1, left - c);
        }
    };
    rec(0, n);
    std::sort(cls.begin(), cls.end(), [](const Cls& a, const Cls& b) { return a.llr > b.llr; });

    long double acc = free_mass;
    std::vector<double> lq_terms;
    for (const auto& c : cls) {
        long double pmass = std::exp(static_cast<long double>(c.lp));
        if (eps > 0.0 && acc + pmass >= target) {
            long double w = (target - acc) / pmass;
            if (w > 0) lq_terms.push_back(c.lq + std::log(static_cast<double>(w)));
            acc = target;
            break;
        }
        acc += pmass;
        lq_terms.push_back(c.lq);
    }
    if (lq_terms.empty()) return kInf;
    double mx = *std::max_element(lq_terms.begin(), lq_terms.end());
    double s = 0.0;
    for (double x : lq_terms) s += std::exp(x - mx);
    return -(mx + std::log(s)) / kLn2;
}

CoherentInfo coherent_info_and_variance(const DensityOperator& rho_ab, Direction dir) {
    if (rho_ab.num_systems() != 2) throw std::invalid_argument("coherent_info_and_variance: state must be bipartite");
    const int dA = rho_ab.dims()[0], dB = rho_ab.dims()[1];
    Mat ref;
    if (dir == Direction::a_to_b) {
        Mat rb = partial_trace(rho_ab.matrix(), rho_ab.dims(), {1});
        ref = kron(Mat::Identity(dA, dA), rb);
    } else {
        Mat ra = partial_trace(rho_ab.matrix(), rho_ab.dims(), {0});
        ref = kron(ra, Mat::Identity(dB, dB));
    }
    return {rel_entropy(rho_ab.matrix(), ref), rel_entropy_variance(rho_ab.matrix(), ref)};
}

MaxEntropyResult conditional_max_entropy_detailed(const DensityOperator& rho_ab, int max_iter) {
    if (rho_ab.num_systems() != 2) throw std::invalid_argument("conditional_max_entropy: state must be bipartite");
    const int dA = rho_ab.dims()[0], dB = rho_ab.dims()[1];
    const Mat sr = msqrt(rho_ab.matrix());
    const Mat ia = Mat::Identity(dA, dA);
    Mat sigma = Mat::Identity(dB, dB) / static_cast<double>(dB);
    double g = 0.0, resid = kInf;
    int it = 0;
    for (; it < max_iter; ++it) {
        Mat x = sr * kron(ia, sigma) * sr;
        Eigh ex = eigh(x);
        double cut = support_cut(ex.values);
        RVec s(ex.values.size()), is(ex.values.size());
        g = 0.0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            bool in = ex.values(i) > cut;
            s(i) = in ? std::sqrt(ex.values(i)) : 0.0;
            is(i) = in ? 1.0 / s(i) : 0.0;
            g += s(i);
        }
        Mat xinv = ex.vectors * is.asDiagonal() * ex.vectors.adjoint();
        Mat gb = partial_trace(sr * xinv * sr, rho_ab.dims(), {1});
        gb = hermitian_part(gb);
        resid = (max_eigenvalue(gb) - g) / (2.0 * g);
        if (resid < 1e-9) break;
        Mat ss = msqrt(sigma);
        Mat nxt = hermitian_part(ss * gb * ss);
        sigma = nxt / nxt.trace().real();
    }
    if (!(resid < 1e-9)) throw NumericalError("conditional_max_entropy: fixed-point iteration did not converge");
    return {2.0 * std::log(g) / kLn2, sigma, it, resid};
}

double conditional_max_entropy(const DensityOperator& rho_ab) { return conditional_max_entropy_detailed(rho_ab).value; }

} // namespace qkdc
