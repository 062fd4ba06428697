#include "qkdc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace qkdc {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt2Pi = 2.50662827463100050242;

void require_eps_open(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
}

void require_n(long n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
}

BoundReport expansion_report(std::string family, std::vector<std::pair<std::string, double>> params, long n,
                             double eps, BoundKind kind, double t1, double t2, double t3, std::string model) {
    BoundReport r;
    r.family = std::move(family);
    r.params = std::move(params);
    r.n = n;
    r.eps = eps;
    r.kind = kind;
    r.terms = {t1, t2, t3, std::move(model)};
    r.value_bits = t1 + t2 + t3;
    r.infinite = std::isinf(r.value_bits);
    return r;
}

nlohmann::json num(double x, int digits) {
    if (!std::isfinite(x)) return nullptr;
    return round_sig(x, digits);
}

double num_back(const nlohmann::json& j) {
    if (j.is_null()) return kInf;
    return j.get<double>();
}

} // namespace

std::string to_string(BoundKind k) {
    switch (k) {
    case BoundKind::converse: return "converse";
    case BoundKind::achievability: return "achievability";
    case BoundKind::exact: return "exact";
    }
    return "unknown";
}

BoundKind bound_kind_from_string(const std::string& s) {
    if (s == "converse") return BoundKind::converse;
    if (s == "achievability") return BoundKind::achievability;
    if (s == "exact") return BoundKind::exact;
    throw std::invalid_argument("unknown bound kind: " + s);
}

double round_sig(double x, int digits) {
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return std::strtod(buf, nullptr);
}

std::string format_number(double x, int digits) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

nlohmann::json to_json(const BoundReport& r, int digits) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.params) params[k] = num(v, digits);
    return {
        {"family", r.family},
        {"params", params},
        {"n", r.n},
        {"eps", num(r.eps, digits)},
        {"kind", to_string(r.kind)},
        {"value_bits", num(r.value_bits, digits)},
        {"infinite", r.infinite},
        {"expansion", r.expansion},
        {"terms",
         {{"first", num(r.terms.first, digits)},
          {"second", num(r.terms.second, digits)},
          {"third", num(r.terms.third, digits)},
          {"remainder_model", r.terms.remainder_model}}},
    };
}

BoundReport report_from_json(const nlohmann::json& j) {
    BoundReport r;
    r.family = j.at("family").get<std::string>();
    // nlohmann keeps object keys sorted, so params come back in key order
    for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) r.params.emplace_back(it.key(), num_back(*it));
    r.n = j.at("n").get<long>();
    r.eps = num_back(j.at("eps"));
    r.kind = bound_kind_from_string(j.at("kind").get<std::string>());
    r.value_bits = num_back(j.at("value_bits"));
    r.infinite = j.at("infinite").get<bool>();
    r.expansion = j.value("expansion", true);
    const auto& t = j.at("terms");
    r.terms.first = num_back(t.at("first"));
    r.terms.second = num_back(t.at("second"));
    r.terms.third = num_back(t.at("third"));
    r.terms.remainder_model = t.at("remainder_model").get<std::string>();
    return r;
}

std::string csv_header() { return "family,params,n,eps,kind,value_bits,term1,term2,term3"; }

std::string to_csv_row(const BoundReport& r, int digits) {
    std::ostringstream os;
    os << r.family << ',';
    for (size_t i = 0; i < r.params.size(); ++i) {
        if (i) os << ';';
        os << r.params[i].first << '=' << format_number(r.params[i].second, digits);
    }
    os << ',' << r.n << ',' << format_number(r.eps, digits) << ',' << to_string(r.kind) << ','
       << format_number(r.value_bits, digits) << ',' << format_number(r.terms.first, digits) << ','
       << format_number(r.terms.second, digits) << ',' << format_number(r.terms.third, digits);
    return os.str();
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double inv_gaussian_cdf(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("inv_gaussian_cdf: eps must lie in (0,1)");
    if (eps == 0.5) return 0.0;
    if (eps > 0.5) return -inv_gaussian_cdf(1.0 - eps);
    // lower tail: rational starting point, then Halley steps on Phi(x) - eps
    double t = std::sqrt(-2.0 * std::log(eps));
    double x = -(t - (2.515517 + 0.802853 * t + 0.010328 * t * t) / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t));
    for (int i = 0; i < 50; ++i) {
        double e = normal_cdf(x) - eps;
        double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
        double step = u / (1.0 + 0.5 * x * u);
        x -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("binary_entropy: argument must lie in [0,1]");
    double h = 0.0;
    if (x > 0.0) h -= x * std::log2(x);
    if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

double dephasing_variance(double x) {
    if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("dephasing_variance: argument must lie in (0,1)");
    double h = binary_entropy(x);
    double a = std::log2(x) + h, b = std::log2(1.0 - x) + h;
    return x * a * a + (1.0 - x) * b * b;
}

double chebyshev_constant(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("chebyshev_constant: eps must lie in [0,1)");
    return std::log2(6.0) + 2.0 * std::log2((1.0 + eps) / (1.0 - eps));
}

BoundReport dephasing_boundary(double gamma, long n, double eps) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("dephasing_boundary: gamma must lie in (0,1)");
    require_n(n);
    require_eps_open(eps);
    const double nn = static_cast<double>(n);
    double t1 = 1.0 - binary_entropy(gamma);
    double t2 = std::sqrt(dephasing_variance(gamma) / nn) * inv_gaussian_cdf(eps);
    double t3 = std::log2(nn) / (2.0 * nn);
    return expansion_report("dephasing", {{"gamma", gamma}}, n, eps, BoundKind::exact, t1, t2, t3, "O(1/n)");
}

namespace {

std::vector<long double> binomial_log_pmf(double p, long n) {
    std::vector<long double> lw(n + 1);
    const long double lp = std::log(static_cast<long double>(p)), lq = std::log1p(-static_cast<long double>(p));
    const long double lgn = std::lgamma(static_cast<long double>(n) + 1.0L);
    for (long l = 0; l <= n; ++l)
        lw[l] = lgn - std::lgamma(static_cast<long double>(l) + 1.0L) - std::lgamma(static_cast<long double>(n - l) + 1.0L) +
                l * lp + (n - l) * lq;
    return lw;
}

long double erasure_sum(const std::vector<long double>& lw, long n, double rate) {
    // sum over l > n(1-rate) of w_l (1 - 2^{n(1-rate) - l})
    const long double x = static_cast<long double>(n) * (1.0L - rate);
    const long double ln2 = 0.693147180559945309417232121458L;
    long l0 = static_cast<long>(std::floor(x)) + 1;
    if (l0 < 0) l0 = 0;
    long double s = 0.0L;
    for (long l = l0; l <= n; ++l) s += -std::exp(lw[l]) * std::expm1((x - l) * ln2);
    return s;
}

void check_erasure_args(double p, long n) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("erasure_boundary: p must lie in (0,1)");
    require_n(n);
}

} // namespace

double erasure_equation(double p, long n, double rate) {
    check_erasure_args(p, n);
    return static_cast<double>(erasure_sum(binomial_log_pmf(p, n), n, rate));
}

std::pair<double, double> erasure_feasible_interval(double p, long n) {
    check_erasure_args(p, n);
    auto lw = binomial_log_pmf(p, n);
    return {0.0, static_cast<double>(erasure_sum(lw, n, 1.0))};
}

BoundReport erasure_boundary(double p, long n, double eps) {
    check_erasure_args(p, n);
    auto lw = binomial_log_pmf(p, n);
    const double fmax = static_cast<double>(erasure_sum(lw, n, 1.0));
    if (!(eps > 0.0 && eps <= fmax)) {
        std::ostringstream os;
        os.precision(12);
        os << "erasure_boundary: eps outside the achievable range (0, " << fmax << "] for n=" << n << ", p=" << p;
        throw std::invalid_argument(os.str());
    }
    // the right-hand side is continuous and strictly increasing in the rate on (0,1]
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        double mid = 0.5 * (lo + hi);
        if (erasure_sum(lw, n, mid) < eps) lo = mid;
        else hi = mid;
    }
    double root = std::abs(erasure_sum(lw, n, lo) - eps) <= std::abs(erasure_sum(lw, n, hi) - eps) ? lo : hi;
    const double nn = static_cast<double>(n);
    double t1 = 1.0 - p;
    double t2 = std::sqrt(p * (1.0 - p) / nn) * inv_gaussian_cdf(eps);
    double t3 = root - t1 - t2;
    BoundReport r = expansion_report("erasure", {{"p", p}}, n, eps, BoundKind::exact, t1, t2, t3,
                                     "exact root; third term is the remainder beyond second order");
    r.value_bits = root;
    return r;
}

double eb_bound(long n, double eps) {
    require_n(n);
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eb_bound: eps must lie in [0,1)");
    return -std::log2(1.0 - eps) / static_cast<double>(n);
}

BoundReport eb_report(long n, double eps) {
    double v = eb_bound(n, eps);
    return expansion_report("entanglement-breaking", {}, n, eps, BoundKind::converse, 0.0, 0.0, v, "exact (1/n)-term only");
}

double chebyshev_dh_bound(double D, double V, double eps, long n) {
    require_n(n);
    require_eps_open(eps);
    if (!(V >= 0.0)) throw std::invalid_argument("chebyshev_dh_bound: V must be non-negative");
    if (!std::isfinite(D) || !std::isfinite(V)) throw std::invalid_argument("chebyshev_dh_bound: D and V must be finite");
    const double nn = static_cast<double>(n);
    return D + std::sqrt(2.0 * V / (nn * (1.0 - eps))) + chebyshev_constant(eps) / nn;
}

BoundReport chebyshev_report(double D, double V, double eps, long n) {
    double total = chebyshev_dh_bound(D, V, eps, n);
    const double nn = static_cast<double>(n);
    double t2 = std::sqrt(2.0 * V / (nn * (1.0 - eps)));
    double t3 = chebyshev_constant(eps) / nn;
    BoundReport r = expansion_report("chebyshev", {{"D", D}, {"V", V}}, n, eps, BoundKind::converse, D, t2, t3, "none (rigorous)");
    r.value_bits = total;
    return r;
}

double second_order_rate(double D, double V, double eps, long n) {
    require_n(n);
    require_eps_open(eps);
    if (!(V >= 0.0)) throw std::invalid_argument("second_order_rate: V must be non-negative");
    if (!std::isfinite(D) || !std::isfinite(V)) throw std::invalid_argument("second_order_rate: D and V must be finite");
    return D + std::sqrt(V / static_cast<double>(n)) * inv_gaussian_cdf(eps);
}

BoundReport second_order_report(double D, double V, double eps, long n) {
    second_order_rate(D, V, eps, n);
    double t2 = std::sqrt(V / static_cast<double>(n)) * inv_gaussian_cdf(eps);
    return expansion_report("second-order", {{"D", D}, {"V", V}}, n, eps, BoundKind::exact, D, t2, 0.0, "O(log n / n)");
}

namespace {

Mat channel_output(const QuantumChannel& ch, const DensityOperator& input) {
    if (input.num_systems() != 2 || input.dims()[1] != ch.in_dim())
        throw std::invalid_argument("input must be a bipartite state [A, A'] with A' matching the channel input");
    const Mat& m = input.matrix();
    double purity = (m * m).trace().real();
    if (std::abs(purity - 1.0) > 1e-9) throw std::invalid_argument("input state must be pure");
    return apply_channel(ch, m, input.dims(), 1);
}

void check_reference(const DensityOperator& tau, const Dims& dims) {
    if (tau.dims() != dims && !(tau.num_systems() == 1 && tau.dim() == dims_product(dims)))
        throw std::invalid_argument("separable reference has the wrong dimensions");
    // PPT is necessary for separability at every dimension
    if (!is_ppt(tau.matrix(), dims, 1, tol().psd))
        throw std::invalid_argument("separable reference violates the PPT criterion");
}

} // namespace

double meta_converse_point(const QuantumChannel& ch, const DensityOperator& input, const DensityOperator& sep_ref,
                           double eps) {
    Mat rho = channel_output(ch, input);
    Dims dims = {input.dims()[0], ch.out_dim()};
    check_reference(sep_ref, dims);
    return hypothesis_test_divergence(rho, sep_ref.matrix(), eps).value;
}

double meta_converse_rate(const QuantumChannel& ch, const DensityOperator& input, const DensityOperator& sep_ref,
                          double eps, int ell) {
    if (ell == 1) return meta_converse_point(ch, input, sep_ref, eps);
    if (ell != 2) throw std::invalid_argument("meta_converse_rate: only ell in {1,2} is supported");
    Mat rho = channel_output(ch, input);
    const int dA = input.dims()[0], dB = ch.out_dim();
    check_reference(sep_ref, {dA, dB});
    // (A1 B1 A2 B2) -> (A1 A2 B1 B2)
    const Dims d4 = {dA, dB, dA, dB};
    const std::vector<int> perm = {0, 2, 1, 3};
    Mat r2 = permute_systems(kron(rho, rho), d4, perm);
    Mat t2 = permute_systems(kron(sep_ref.matrix(), sep_ref.matrix()), d4, perm);
    return hypothesis_test_divergence(r2, t2, eps).value / 2.0;
}

double StrongConverseExponent::fidelity_bound(long n) const {
    double l2 = -static_cast<double>(n) * exponent;
    if (prefactor_power) l2 += *prefactor_power * std::log2(static_cast<double>(n));
    return std::min(1.0, std::exp2(l2));
}

StrongConverseExponent strong_converse_exponent(double rate, double renyi_ref, double alpha, std::optional<int> dims_penalty) {
    if (!(alpha > 1.0)) throw std::invalid_argument("strong_converse_exponent: alpha must exceed 1");
    StrongConverseExponent e;
    e.exponent = std::max(0.0, (alpha - 1.0) / alpha * (rate - renyi_ref));
    if (dims_penalty) {
        if (*dims_penalty < 1) throw std::invalid_argument("strong_converse_exponent: dimension must be positive");
        e.prefactor_power = static_cast<double>(*dims_penalty) * *dims_penalty;
    }
    return e;
}

BoundReport achievability_lower(const QuantumChannel& ch, const DensityOperator& input, double eps, long n,
                                AchievabilityDirection dir, const std::string& family) {
    require_n(n);
    require_eps_open(eps);
    Mat rho = channel_output(ch, input);
    DensityOperator theta(hermitian_part(rho), {input.dims()[0], ch.out_dim()});
    CoherentInfo ci = coherent_info_and_variance(theta, dir == AchievabilityDirection::coherent ? Direction::a_to_b : Direction::b_to_a);
    double t2 = std::sqrt(ci.variance / static_cast<double>(n)) * inv_gaussian_cdf(eps);
    return expansion_report(family, {{"direction", dir == AchievabilityDirection::coherent ? 0.0 : 1.0}}, n, eps,
                            BoundKind::achievability, ci.info, t2, 0.0, "O(log n / n)");
}

double one_shot_distillation_rate(const DensityOperator& rho_ab, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("one_shot_distillation_rate: eta must lie in (0,1]");
    return -conditional_max_entropy(rho_ab) - 4.0 * std::log2(1.0 / eta);
}

double clamp_rate(double x) { return std::max(0.0, x); }

} // namespace qkdc
