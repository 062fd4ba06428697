#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "test_util.hpp"

#include "qkdc/privstate.hpp"
#include "qkdc/qcore.hpp"
#include "qkdc/simulate.hpp"

#include <cmath>

using namespace qkdc;
using testutil::max_abs;

TEST_CASE("density operator validation") {
    Mat m = Mat::Identity(2, 2) / 2.0;
    CHECK_NOTHROW(DensityOperator(m, {2}));
    Mat nh = m;
    nh(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityOperator(nh, {2}), std::invalid_argument);
    CHECK_THROWS_AS(DensityOperator(testutil::diag({1.2, -0.2}), {2}), std::invalid_argument);
    CHECK_THROWS_AS(DensityOperator(Mat::Identity(2, 2), {2}), std::invalid_argument);
    CHECK_NOTHROW(DensityOperator(m * 0.5, {2}, TraceTag::subnormalized));
    CHECK_THROWS_AS(DensityOperator(m * 1.1, {2}, TraceTag::subnormalized), std::invalid_argument);
    CHECK_THROWS_AS(DensityOperator(Mat::Identity(4, 4) / 4.0, {2, 3}), std::invalid_argument);
    // tolerance edge: a 1e-11 deficit is accepted, 1e-9 is not
    CHECK_NOTHROW(DensityOperator(testutil::diag({0.5, 0.5 - 1e-11}), {2}));
    CHECK_THROWS(DensityOperator(testutil::diag({0.5, 0.5 - 1e-9}), {2}));
}

TEST_CASE("channel completeness") {
    CHECK_THROWS_AS(QuantumChannel({Mat::Identity(2, 2) * 0.9}, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(QuantumChannel({Mat::Identity(3, 2)}, 2, 2), std::invalid_argument);
    Rng rng(3);
    auto ch = random_channel(2, 3, 4, rng);
    Mat s = Mat::Zero(2, 2);
    for (const auto& k : ch.kraus()) s += k.adjoint() * k;
    CHECK(max_abs(s - Mat::Identity(2, 2)) < 1e-12);
    DensityOperator c = ch.choi();
    CHECK(c.dims() == Dims{2, 3});
    CHECK(max_abs(partial_trace(c.matrix(), c.dims(), {0}) - Mat::Identity(2, 2) / 2.0) < 1e-12);
}

TEST_CASE("partial trace examples and oracle") {
    DensityOperator phi = maximally_entangled(2);
    CHECK(max_abs(partial_trace(phi, {0}).matrix() - Mat::Identity(2, 2) / 2.0) < 1e-12);
    Rng rng(11);
    DensityOperator a = random_density(2, rng), b = random_density(3, rng);
    DensityOperator ab = tensor(a, b);
    CHECK(max_abs(partial_trace(ab, {0}).matrix() - a.matrix()) < 1e-12);
    CHECK(max_abs(partial_trace(ab, {1}).matrix() - b.matrix()) < 1e-12);
    CHECK_THROWS_AS(partial_trace(ab, {2}), std::invalid_argument);

    // private state marginal against the index-loop oracle
    PrivateState g(2, PrivateState::random_twist(2, 4, rng), random_density(4, rng));
    DensityOperator gamma(g.state().matrix(), {2, 2, 2, 2});
    auto pt = partial_trace(gamma, {0, 1});
    CHECK(pt.dims() == Dims{2, 2});
    CHECK(max_abs(pt.matrix() - oracle::partial_trace_loop(gamma.matrix(), gamma.dims(), {0, 1})) < 1e-12);

    for (int t = 0; t < 20; ++t) {
        Dims d = {2, 3, 2};
        DensityOperator r(random_density(12, rng).matrix(), d);
        std::vector<std::vector<int>> keeps = {{0}, {1}, {2}, {0, 2}, {1, 2}, {0, 1}, {0, 1, 2}, {}};
        for (const auto& k : keeps) {
            Mat lib = partial_trace(r.matrix(), d, k);
            Mat orc = oracle::partial_trace_loop(r.matrix(), d, k);
            CHECK(max_abs(lib - orc) < 1e-12);
            CHECK(std::abs(lib.trace().real() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("permute and partial transpose") {
    Rng rng(5);
    DensityOperator a = random_density(2, rng), b = random_density(3, rng);
    Mat ba = permute_systems(tensor(a, b).matrix(), {2, 3}, {1, 0});
    CHECK(max_abs(ba - kron(b.matrix(), a.matrix())) < 1e-12);
    Mat phi = maximally_entangled(3).matrix();
    Mat ptp = partial_transpose(phi, {3, 3}, 1);
    CHECK(std::abs(min_eigenvalue(ptp) + 1.0 / 3.0) < 1e-12);
    CHECK(max_abs(partial_transpose(ptp, {3, 3}, 1) - phi) < 1e-14);
    CHECK_FALSE(is_ppt(phi, {3, 3}, 1, 1e-10));
}

TEST_CASE("fidelity and distances") {
    Vec z0(2), z1(2), plus(2);
    z0 << 1, 0;
    z1 << 0, 1;
    plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    auto p0 = pure_state(z0), p1 = pure_state(z1), pp = pure_state(plus);
    CHECK(fidelity(p0, p1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fidelity(p0, pp) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(purified_distance(p0, p1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(purified_distance(p0, p0) == doctest::Approx(0.0).epsilon(1e-12));
    // P(|0><0|, |0><0|/2): root fidelity 1/sqrt2, no correction since Tr rho = 1
    DensityOperator half(p0.matrix() / 2.0, {2}, TraceTag::subnormalized);
    CHECK(purified_distance(p0, half) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    // embedded 3x3 evaluation of the same quantity
    Mat e1 = direct_sum(p0.matrix(), Mat::Zero(1, 1)), e2 = direct_sum(half.matrix(), Mat::Identity(1, 1) * 0.5);
    CHECK(purified_distance(p0, half) == doctest::Approx(std::sqrt(1.0 - fidelity(e1, e2))).epsilon(1e-12));
    CHECK_THROWS_AS(fidelity(Mat::Identity(2, 2), Mat::Identity(3, 3)), std::invalid_argument);

    Rng rng(17);
    for (int t = 0; t < 50; ++t) {
        auto r = random_density(3, rng), s = random_density(3, rng), u = random_density(3, rng);
        CHECK(fidelity(r, r) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(fidelity(r, s) == doctest::Approx(fidelity(s, r)).epsilon(1e-10));
        CHECK(purified_distance(r, u) <= purified_distance(r, s) + purified_distance(s, u) + 1e-12);
        double td = trace_distance(r.matrix(), s.matrix());
        CHECK(td <= purified_distance(r, s) + 1e-12);
        CHECK(1.0 - std::sqrt(fidelity(r, s)) <= td + 1e-12);
    }
}

TEST_CASE("fidelity monotone under channels") {
    Rng rng(23);
    int checked = 0;
    for (int t = 0; t < 120; ++t) {
        int din = 2 + t % 3, dout = 2 + (t / 3) % 3;
        auto r = random_density(din, rng), s = random_density(din, rng);
        auto ch = random_channel(din, dout, 2 + t % 3, rng);
        double before = fidelity(r, s);
        double after = fidelity(ch.apply(r.matrix()), ch.apply(s.matrix()));
        CHECK(after >= before - 1e-9);
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("apply_channel") {
    Rng rng(29);
    auto r = random_density(2, rng);
    auto id = QuantumChannel::identity(2);
    CHECK(max_abs(apply_channel(id, r, 0).matrix() - r.matrix()) < 1e-14);
    ChannelFamily f;
    f.kind = ChannelKind::dephasing;
    f.gamma = 0.5;
    Vec plus(2);
    plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    CHECK(max_abs(make_channel(f).apply(pure_state(plus).matrix()) - Mat::Identity(2, 2) / 2.0) < 1e-14);
    f.kind = ChannelKind::erasure;
    f.p = 0.3;
    Mat out = make_channel(f).apply(r.matrix());
    Mat want = direct_sum(0.7 * r.matrix(), 0.3 * Mat::Identity(1, 1));
    CHECK(max_abs(out - want) < 1e-14);

    // disjoint subsystems: partial trace commutes with a channel on the other factor
    for (int t = 0; t < 20; ++t) {
        DensityOperator ab(random_density(6, rng).matrix(), {2, 3});
        auto ch = random_channel(3, 2, 3, rng);
        auto out2 = apply_channel(ch, ab, 1);
        CHECK(out2.dims() == Dims{2, 2});
        CHECK(std::abs(out2.trace() - 1.0) < 1e-10);
        CHECK(min_eigenvalue(out2.matrix()) > -1e-10);
        CHECK(max_abs(partial_trace(out2, {0}).matrix() - partial_trace(ab, {0}).matrix()) < 1e-10);
        auto ch0 = random_channel(2, 3, 2, rng);
        Mat lhs = partial_trace(apply_channel(ch0, ab, 0), {1}).matrix();
        CHECK(max_abs(lhs - partial_trace(ab, {1}).matrix()) < 1e-10);
    }
    CHECK_THROWS_AS(apply_channel(id, DensityOperator(Mat::Identity(3, 3) / 3.0, {3}), 0), std::invalid_argument);
}

TEST_CASE("maximally entangled state") {
    CHECK_THROWS_AS(maximally_entangled(0), std::invalid_argument);
    auto phi = maximally_entangled(2);
    Vec v = Vec::Zero(4);
    v(0) = v(3) = 1 / std::sqrt(2.0);
    CHECK(max_abs(phi.matrix() - v * v.adjoint()) < 1e-15);
    for (int d = 1; d <= 5; ++d) {
        auto p = maximally_entangled(d);
        Mat id = Mat::Identity(d, d) / static_cast<double>(d);
        CHECK(max_abs(partial_trace(p, {0}).matrix() - id) < 1e-12);
        CHECK(max_abs(partial_trace(p, {1}).matrix() - id) < 1e-12);
        CHECK(fidelity(p, p) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sample_separable") {
    auto s1 = sample_separable(2, 3, 1, 42);
    CHECK(std::abs((s1.matrix() * s1.matrix()).trace().real() - 1.0) < 1e-10);
    auto a = partial_trace(s1, {0}).matrix();
    CHECK(std::abs((a * a).trace().real() - 1.0) < 1e-10);
    auto x = sample_separable(2, 2, 5, 7), y = sample_separable(2, 2, 5, 7);
    CHECK((x.matrix().array() == y.matrix().array()).all());
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto s = sample_separable(2, 3, 4, seed);
        CHECK(is_ppt(s.matrix(), s.dims(), 1, 1e-10));
        CHECK(is_ppt(s.matrix(), s.dims(), 0, 1e-10));
    }
}

TEST_CASE("random objects") {
    Rng rng(31);
    for (int d = 1; d <= 4; ++d) {
        CHECK(is_unitary(haar_unitary(d, rng), 1e-12));
        CHECK(std::abs(haar_vector(d, rng).norm() - 1.0) < 1e-12);
        auto r = random_density(d, rng, 1);
        CHECK(std::abs((r.matrix() * r.matrix()).trace().real() - 1.0) < 1e-10);
    }
}
