#include <cmath>
#include <random>

#include "doctest.h"
#include "npbrane/swflow.hpp"
#include "test_util.hpp"

using namespace npb;

namespace {

ScalarFn var(const Chart& c, int i) { return ScalarFn::variable(c.dim(), i); }

AltTensor block_pi(const Chart& c, const std::vector<int>& idx) {
    AltTensor t(c, (int)idx.size(), Variance::vector_field);
    t.add_term(idx, ScalarFn(c.dim(), Rat(1)));
    return t;
}

// Flagship instance: π = ∂1∧∂2∧∂3 on a 4-chart, a = x1 x4 dx2∧dx3.
struct Flagship {
    Chart c{4};
    AltTensor pi;
    AltTensor a;
    Flagship()
        : pi(block_pi(c, {0, 1, 2})), a(c, 2, Variance::form) {
        a.add_term({1, 2}, var(c, 0) * var(c, 3));
    }
};

// Decomposable tensor with a polynomial scalar factor and a constant shear;
// keeps the gauge operator's rational matrix algebra small.
AltTensor sheared_trivector(std::mt19937_64& rng, const Chart& c) {
    std::uniform_int_distribution<int> shear(-2, 2);
    AltTensor u = AltTensor::zero(c, 1, Variance::vector_field);
    u.add_term({0}, ScalarFn(c.dim(), Rat(1)));
    u.add_term({3}, ScalarFn(c.dim(), Rat(shear(rng))));
    AltTensor t = wedge(wedge(u, block_pi(c, {1})), block_pi(c, {2}));
    ScalarFn f = nptest::random_poly_fn(rng, c.dim(), 2, 1);
    if (f.is_zero()) f = ScalarFn(c.dim(), Rat(1));
    return t * f;
}

AltTensor random_threeform(std::mt19937_64& rng, const Chart& c) {
    AltTensor b = AltTensor::zero(c, 3, Variance::form);
    std::uniform_int_distribution<int> pick(0, 1);
    for (const std::vector<int> idx :
         {std::vector<int>{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}})
        if (pick(rng)) b.add_term(idx, nptest::random_poly_fn(rng, c.dim(), 1, 1));
    return b;
}

std::vector<Rat> rational_box_point(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> num(0, 64);
    std::vector<Rat> x;
    for (int i = 0; i < n; ++i) x.emplace_back(Rat(num(rng), 64));
    return x;
}

} // namespace

TEST_CASE("pi_t interpolates between the identity and the gauge transform") {
    std::mt19937_64 rng(71);
    Chart c(4);
    for (int iter = 0; iter < 4; ++iter) {
        AltTensor pi = sheared_trivector(rng, c);
        AltTensor b = random_threeform(rng, c);
        AltTensor start = pi_t_at(pi, b, Rat(0));
        bool at_zero = (start == pi);
        CHECK(at_zero);
        bool at_one = (pi_t_at(pi, b, Rat(1)) == gauge_transform(pi, b));
        CHECK(at_one);
    }
}

TEST_CASE("pi_t scalar branch: top-form twist of a coordinate block") {
    Chart c(4);
    AltTensor pi = block_pi(c, {0, 1, 2});
    AltTensor b(c, 3, Variance::form);
    b.add_term({0, 1, 2}, var(c, 3));

    AltTensor pt = pi_t(pi, b);
    Chart c5 = flow_chart(c);
    ScalarFn denom = ScalarFn(5, Rat(1)) +
                     ScalarFn::variable(5, 3) * ScalarFn::variable(5, 4);
    AltTensor expected(c5, 3, Variance::vector_field);
    expected.add_term({0, 1, 2}, denom.inverse());
    bool match = (pt == expected);
    CHECK(match);

    // Fixed-parameter slices agree with direct substitution.
    bool slice = (pi_t_at(pi, b, Rat(1, 2)) == substitute_last(pt, Rat(1, 2)));
    CHECK(slice);
}

TEST_CASE("pi_t is constant in the parameter when the twist vanishes") {
    Flagship f;
    AltTensor closed_a(f.c, 2, Variance::form);
    closed_a.add_term({0, 1}, ScalarFn(4, Rat(1))); // a = dx1∧dx2, da = 0
    bool constant = (pi_t(f.pi, ext_d(closed_a)) == extend_tensor(f.pi));
    CHECK(constant);
}

TEST_CASE("ode_defect vanishes identically on closed-form solutions") {
    Chart c(4);
    AltTensor pi = block_pi(c, {0, 1, 2});

    AltTensor b0 = AltTensor::zero(c, 3, Variance::form);
    CHECK(ode_defect(pi, b0).is_zero());

    AltTensor b(c, 3, Variance::form);
    b.add_term({0, 1, 2}, var(c, 3));
    CHECK(ode_defect(pi, b).is_zero());

    Flagship f;
    CHECK(ode_defect(f.pi, ext_d(f.a)).is_zero());

    std::mt19937_64 rng(1723);
    for (int iter = 0; iter < 20; ++iter) {
        AltTensor rpi = sheared_trivector(rng, c);
        AltTensor rb = random_threeform(rng, c);
        CHECK(ode_defect(rpi, rb).is_zero());
    }
}

TEST_CASE("flow: a closed potential translates along the complementary axis") {
    Flagship f;
    AltTensor closed_a(f.c, 2, Variance::form);
    closed_a.add_term({0, 1}, ScalarFn(4, Rat(1)));

    FlowConfig cfg;
    std::vector<Rat> x0{Rat(1, 3), Rat(-1, 2), Rat(2, 7), Rat(5)};
    FlowResult r = flow(f.pi, closed_a, cfg, x0);
    CHECK(std::fabs(r.endpoint[0] - 1.0 / 3.0) < 1e-12);
    CHECK(std::fabs(r.endpoint[1] + 0.5) < 1e-12);
    CHECK(std::fabs(std::fabs(r.endpoint[2] - 2.0 / 7.0) - 1.0) < 1e-12);
    CHECK(std::fabs(r.endpoint[3] - 5.0) < 1e-12);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::fabs(r.jacobian[i][j] - (i == j ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("flow: zero potential gives the identity map") {
    Flagship f;
    AltTensor zero_a = AltTensor::zero(f.c, 2, Variance::form);
    FlowConfig cfg;
    std::vector<Rat> x0{Rat(1), Rat(2), Rat(3), Rat(4)};
    FlowResult r = flow(f.pi, zero_a, cfg, x0);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::fabs(r.endpoint[i] - (double)(i + 1)) < 1e-14);
        for (int j = 0; j < 4; ++j)
            CHECK(std::fabs(r.jacobian[i][j] - (i == j ? 1.0 : 0.0)) < 1e-14);
    }
}

TEST_CASE("flow: flagship endpoint matches the separably solved scalar ODE") {
    // With v1 = -x1 x4 / (1 + t x4), x4 constant: x1(t) = x1(0) / (1 + t x4).
    Flagship f;
    FlowConfig cfg;
    for (auto& x0 : std::vector<std::vector<Rat>>{
             {Rat(1, 2), Rat(1, 5), Rat(3, 10), Rat(7, 10)},
             {Rat(-2, 3), Rat(1), Rat(0), Rat(1, 4)},
             {Rat(1), Rat(-1), Rat(2), Rat(3, 2)}}) {
        FlowResult r = flow(f.pi, f.a, cfg, x0);
        double x1 = rat_to_double(x0[0]), x4 = rat_to_double(x0[3]);
        CHECK(std::fabs(r.endpoint[0] - x1 / (1 + x4)) < 1e-9);
        CHECK(std::fabs(r.endpoint[1] - rat_to_double(x0[1])) < 1e-12);
        CHECK(std::fabs(r.endpoint[2] - rat_to_double(x0[2])) < 1e-12);
        CHECK(std::fabs(r.endpoint[3] - x4) < 1e-12);
        CHECK(std::fabs(r.jacobian[0][0] - 1 / (1 + x4)) < 1e-9);
    }
}

TEST_CASE("flow: configuration validation") {
    Flagship f;
    std::vector<Rat> x0{Rat(0), Rat(0), Rat(0), Rat(0)};
    FlowConfig bad;
    bad.step = Rat(0);
    CHECK_THROWS_AS(flow(f.pi, f.a, bad, x0), StepUnderflow);
    bad.step = Rat(-1, 10);
    CHECK_THROWS_AS(flow(f.pi, f.a, bad, x0), StepUnderflow);
    bad.step = Rat(2);
    CHECK_THROWS_AS(flow(f.pi, f.a, bad, x0), std::invalid_argument);
    CHECK_THROWS_AS(flow(f.pi, f.a, FlowConfig{},
                         std::vector<Rat>{Rat(0), Rat(0)}),
                    std::invalid_argument);
}

TEST_CASE("flow: a pole along the trajectory is reported") {
    // At x4 = -1 the twisted tensor 1/(1 + t x4) blows up as t -> 1.
    Flagship f;
    FlowConfig cfg;
    std::vector<Rat> x0{Rat(1, 2), Rat(1, 5), Rat(3, 10), Rat(-1)};
    CHECK_THROWS_AS(flow(f.pi, f.a, cfg, x0), PoleEncountered);
}

TEST_CASE("sw_verify: closed potential leaves the tensor invariant") {
    Flagship f;
    AltTensor closed_a(f.c, 2, Variance::form);
    closed_a.add_term({0, 1}, ScalarFn(4, Rat(1)));
    FlowConfig cfg;
    std::vector<std::vector<Rat>> samples{
        {Rat(1, 2), Rat(1, 5), Rat(3, 10), Rat(7, 10)},
        {Rat(-1, 3), Rat(2, 7), Rat(1, 9), Rat(2, 5)}};
    CHECK(sw_verify(f.pi, closed_a, cfg, samples) < 1e-12);
}

TEST_CASE("sw_verify: flagship defect below tolerance at 20 random points") {
    Flagship f;
    FlowConfig cfg;
    std::mt19937_64 rng(902);
    std::vector<std::vector<Rat>> samples;
    for (int s = 0; s < 20; ++s) samples.push_back(rational_box_point(rng, 4));
    double defect = sw_verify(f.pi, f.a, cfg, samples);
    CHECK(defect < 1e-6);
}

TEST_CASE("sw_verify: halving the step improves the defect fourth-order") {
    // The flagship map is reproduced by the integrator to roundoff at any
    // step, so the convergence rate is measured on a potential whose flow has
    // genuine truncation error.
    Chart c(4);
    AltTensor pi = block_pi(c, {0, 1, 2});
    AltTensor a(c, 2, Variance::form);
    a.add_term({1, 2}, var(c, 0) * var(c, 0) * var(c, 3));
    std::vector<std::vector<Rat>> samples{
        {Rat(1, 2), Rat(1, 5), Rat(3, 10), Rat(7, 10)}};
    double prev = 0.0;
    for (int den : {4, 8, 16}) {
        FlowConfig cfg;
        cfg.step = Rat(1, den);
        double d = sw_verify(pi, a, cfg, samples);
        if (prev > 0.0) {
            double ratio = prev / d;
            CHECK(ratio > 12.0);
            CHECK(ratio < 20.0);
        }
        prev = d;
    }
}

TEST_CASE("gauge transforms compose as a shear group") {
    std::mt19937_64 rng(4451);
    Chart c(4);
    ScalarFn minus_one(4, Rat(-1));
    for (int iter = 0; iter < 6; ++iter) {
        AltTensor pi = sheared_trivector(rng, c);
        AltTensor b = random_threeform(rng, c);
        AltTensor forward = gauge_transform(pi, b);
        bool roundtrip = (gauge_transform(forward, b * minus_one) == pi);
        CHECK(roundtrip);
    }
}

TEST_CASE("mu_lambda: order zero returns the potential unchanged") {
    Flagship f;
    std::mt19937_64 rng(13);
    for (int iter = 0; iter < 3; ++iter) {
        AltTensor lam = AltTensor::zero(f.c, 1, Variance::form);
        for (int i = 0; i < 4; ++i) {
            ScalarFn g = nptest::random_poly_fn(rng, 4, 1, 1);
            if (!g.is_zero()) lam.add_term({i}, g);
        }
        bool same = (mu_lambda(f.pi, f.a, lam, 0) == lam);
        CHECK(same);
    }
}

TEST_CASE("mu_lambda: constant potential and closed twist stay fixed") {
    Flagship f;
    AltTensor closed_a(f.c, 2, Variance::form);
    closed_a.add_term({0, 1}, ScalarFn(4, Rat(1)));
    AltTensor lam(f.c, 1, Variance::form);
    lam.add_term({3}, ScalarFn(4, Rat(7)));
    for (int K : {0, 1, 3}) {
        bool same = (mu_lambda(f.pi, closed_a, lam, K) == lam);
        CHECK(same);
    }
}

TEST_CASE("mu_lambda: flagship regression at order two") {
    Flagship f;
    AltTensor lam(f.c, 1, Variance::form);
    lam.add_term({3}, var(f.c, 0)); // λ = x1 dx4

    AltTensor expected(f.c, 1, Variance::form);
    expected.add_term({3}, var(f.c, 0) +
                               var(f.c, 0) * var(f.c, 3) * ScalarFn(4, Rat(1, 2)));
    bool k2 = (mu_lambda(f.pi, f.a, lam, 2) == expected);
    CHECK(k2);
    // The series for this instance terminates after the first correction.
    bool k1 = (mu_lambda(f.pi, f.a, lam, 1) == expected);
    CHECK(k1);
}

TEST_CASE("mu_lambda: argument validation") {
    Flagship f;
    AltTensor bad_lambda = AltTensor::zero(f.c, 2, Variance::form);
    CHECK_THROWS_AS(mu_lambda(f.pi, f.a, bad_lambda, 1), std::invalid_argument);
    AltTensor lam = AltTensor::zero(f.c, 1, Variance::form);
    CHECK_THROWS_AS(mu_lambda(f.pi, f.a, lam, -1), std::invalid_argument);
}

TEST_CASE("parameter extension and substitution round-trip") {
    std::mt19937_64 rng(555);
    Chart c(4);
    for (int iter = 0; iter < 5; ++iter) {
        AltTensor t = nptest::random_tensor(rng, c, 2, Variance::form);
        bool back = (substitute_last(extend_tensor(t), Rat(3, 7)) == t);
        CHECK(back);
    }
}
