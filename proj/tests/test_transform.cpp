#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pdebound/transform.hpp"

using namespace pdebound;

namespace {

Polynomial px(const std::string& s) { return parse_polynomial(s, VarSet({"x"})); }

// Heat-type scalar problem with Dirichlet u(t,0)=u(t,1)=0.
PdeProblem heat_problem() {
    PdeProblem prob;
    prob.n = 1;
    prob.alpha.orders = {2};
    prob.F = {parse_polynomial("u2", VarSet({"u0", "u1", "u2"}))};
    Eigen::MatrixXd Q(2, 4);
    Q << 1, 0, 0, 0, 0, 0, 1, 0;  // u(1)=0, u(0)=0
    prob.Q = Q;
    prob.u0 = {px("pi x (1 - x)") * (1.0 / (4.0 * std::atan(1.0)))};  // x(1-x)
    prob.u0 = {px("x - x^2")};
    prob.T = 0.1;
    return prob;
}

// Random field u(t,x) of degree <= 5 with u(t,0) = u(t,1) = 0.
Polynomial random_dirichlet_field(std::mt19937& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    VarSet vs({"t", "x"});
    Polynomial q(vs);
    for (int a = 0; a <= 2; ++a)
        for (int b = 0; a + b <= 3; ++b) q.set_coeff(Mono{a, b}, coef(rng));
    return cmul(reordered(px("x - x^2"), vs), q);
}

// Substitutes concrete values for the p template symbols.
Polynomial fix_p(const Polynomial& g, const std::vector<double>& pvals) {
    std::map<std::string, Polynomial> sub;
    for (size_t k = 0; k < pvals.size(); ++k)
        sub["p" + std::to_string(k)] = Polynomial::constant(pvals[k]);
    return compacted(substitute(g, sub));
}

// Fields of the split problem induced by a single original field.
std::vector<Polynomial> split_fields(const PdeProblem& split, const Polynomial& u) {
    std::vector<Polynomial> out;
    for (const auto& cm : split.comap) {
        VarSet vx({"x"});
        Polynomial xr = Polynomial::constant(cm.offset) +
                        cm.scale * Polynomial::variable(vx, "x");
        out.push_back(substitute(u, {{"x", xr}}));
    }
    return out;
}

double eval_at_t(const Polynomial& p, double t) {
    return evaluate(p, {{"t", t}});
}

}  // namespace

TEST_CASE("validate accepts the heat problem and rejects bad shapes") {
    PdeProblem prob = heat_problem();
    CHECK_NOTHROW(validate(prob));
    PdeProblem bad = prob;
    bad.u0 = {px("1 + x")};
    CHECK_THROWS_AS(validate(bad), Error);
    PdeProblem badq = prob;
    badq.Q = Eigen::MatrixXd::Zero(2, 3);
    CHECK_THROWS_AS(validate(badq), Error);
    PdeProblem badf = prob;
    badf.F = {parse_polynomial("u3", VarSet({"u0", "u1", "u2", "u3"}))};
    CHECK_THROWS_AS(validate(badf), Error);
}

TEST_CASE("boundary point side 0 with p = x - 1 reproduces the flux integrand") {
    PdeProblem prob = heat_problem();
    OutputFunctional y;
    y.kind = OutputFunctional::Kind::BoundaryPoint;
    y.side = 0;
    y.g = parse_polynomial("u1", VarSet({"u0", "u1"}));
    y.beta.orders = {1};
    auto fi = to_full_integral(y, prob, 1);
    CHECK(fi.p_degree == 1);
    REQUIRE(fi.p_constraints.size() == 2);
    // p = -1 + x satisfies p(1)=0, p(0)=-1
    Polynomial g = fix_p(fi.g, {-1.0, 1.0});
    CHECK(almost_equal(g, parse_polynomial("u1 + x u2 - u2", g.vars())));
}

TEST_CASE("boundary point trivial checks with linear fields") {
    PdeProblem prob = heat_problem();
    OutputFunctional y;
    y.kind = OutputFunctional::Kind::BoundaryPoint;
    y.g = parse_polynomial("u0", VarSet({"u0"}));
    y.beta.orders = {0};

    y.side = 1;
    auto fi = to_full_integral(y, prob, 1);
    Polynomial g = fix_p(fi.g, {0.0, 1.0});  // p = x
    CHECK(almost_equal(g, parse_polynomial("u0 + x u1", g.vars())));
    // u = x: integral_0^1 (x + x) dx = 1 = u(1)
    Polynomial v = integral_on_fields(g, {px("x")}, {1});
    CHECK(eval_at_t(v + Polynomial::constant(0.0), 0.0) == doctest::Approx(1.0));

    y.side = 0;
    auto fi0 = to_full_integral(y, prob, 1);
    Polynomial g0 = fix_p(fi0.g, {-1.0, 1.0});  // p = x - 1
    // u = 1 - x: integral (1 - x - (x-1)) dx = 1 = u(0)
    Polynomial v0 = integral_on_fields(g0, {px("1 - x")}, {1});
    CHECK(eval_at_t(v0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("split_at_point heat example") {
    PdeProblem prob = heat_problem();
    PdeProblem sp = split_at_point(prob, 0.5);
    CHECK(sp.n == 2);
    CHECK(sp.alpha.orders == std::vector<int>{2, 2});
    // both halves obey dt u_i = 4 dxx u_i
    for (int c = 0; c < 2; ++c) {
        Polynomial expect = 4.0 * Polynomial::variable(sp.F[(size_t)c].vars(),
                                                       jet_name(c, 2, 2));
        CHECK(almost_equal(sp.F[(size_t)c], expect));
    }
    // u0 halves
    CHECK(almost_equal(sp.u0[0], px("0.5 x - 0.25 x^2")));
    CHECK(almost_equal(sp.u0[1], px("(0.5 + 0.5 x) - (0.5 + 0.5 x)^2")));
    // interface rows make the split initial condition admissible
    CHECK_NOTHROW(validate(sp, 1e-9));
    CHECK(sp.Q.rows() == 2 + 2);  // two original rows + order-0/1 matching
}

TEST_CASE("subdomain split keeps alpha=1 interface rows") {
    PdeProblem prob;
    prob.n = 1;
    prob.alpha.orders = {1};
    prob.F = {parse_polynomial("u1", VarSet({"u0", "u1"}))};
    prob.Q = Eigen::MatrixXd::Zero(1, 2);
    prob.Q(0, 1) = 1;  // u(t,0) = 0
    prob.u0 = {px("x")};
    prob.T = 1.0;
    PdeProblem sp = split_subdomain(prob, 0.25, 0.75);
    CHECK(sp.n == 3);
    CHECK(sp.Q.rows() == 3);  // one original + two interface rows
    CHECK_NOTHROW(validate(sp, 1e-9));
}

TEST_CASE("exactness of all rewrites on random admissible fields") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    PdeProblem prob = heat_problem();
    VarSet gv({"t", "x", "u0", "u1"});

    for (int rep = 0; rep < 50; ++rep) {
        Polynomial u = random_dirichlet_field(rng);
        Polynomial ux = differentiate(u, "x");
        // random g(t, x, u, ux) of low degree
        Polynomial g(gv);
        for (int k = 0; k < 6; ++k) {
            Mono m{static_cast<int>(rng() % 2), static_cast<int>(rng() % 2),
                   static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)};
            g.set_coeff(m, coef(rng));
        }
        OutputFunctional y;
        y.g = g;
        y.beta.orders = {1};
        double t = 0.3 + 0.4 * coef(rng);

        Polynomial gsub = substitute(g, jet_bindings({u}, {1}));  // g(t,x) on the field

        // BoundaryPoint, both sides, with a random degree-2 admissible p
        for (int side : {0, 1}) {
            y.kind = OutputFunctional::Kind::BoundaryPoint;
            y.side = side;
            auto fi = to_full_integral(y, prob, 2);
            // p(x) = a x^2 + b x + c subject to the two template rows
            double a = coef(rng);
            std::vector<double> pv(3);
            if (side == 0) {  // p(1)=0, p(0)=-1
                pv = {-1.0, 1.0 - a, a};
            } else {  // p(0)=0, p(1)=1
                pv = {0.0, 1.0 - a, a};
            }
            Polynomial gp = fix_p(fi.g, pv);
            double got = eval_at_t(integral_on_fields(gp, {u}, {2}), t);
            double want = evaluate(gsub, {{"t", t}, {"x", double(side)}});
            CHECK(got == doctest::Approx(want).epsilon(1e-10));
        }

        // InteriorPoint
        {
            y.kind = OutputFunctional::Kind::InteriorPoint;
            y.x0 = 0.37;
            auto fi = to_full_integral(y, prob, 2);
            double a = coef(rng);
            std::vector<double> pv = {0.0, 1.0 - a, a};  // p(0)=0, p(1)=1
            Polynomial gp = fix_p(fi.g, pv);
            auto fields = split_fields(fi.prob, u);
            std::vector<int> mo(fields.size(), 2);
            double got = eval_at_t(integral_on_fields(gp, fields, mo), t);
            double want = evaluate(gsub, {{"t", t}, {"x", y.x0}});
            CHECK(got == doctest::Approx(want).epsilon(1e-10));
        }

        // SubdomainIntegral
        {
            y.kind = OutputFunctional::Kind::SubdomainIntegral;
            y.x1 = 0.2;
            y.x2 = 0.65;
            auto fi = to_full_integral(y, prob, 2);
            CHECK(fi.p_degree == -1);
            auto fields = split_fields(fi.prob, u);
            std::vector<int> mo(fields.size(), 1);
            double got = eval_at_t(integral_on_fields(fi.g, fields, mo), t);
            Polynomial anti = substitute(gsub, {{"t", Polynomial::constant(t)}});
            double want = evaluate(integrate(anti, "x", y.x1, y.x2), {});
            CHECK(got == doctest::Approx(want).epsilon(1e-10));
        }

        // FullIntegral is the identity
        {
            y.kind = OutputFunctional::Kind::FullIntegral;
            auto fi = to_full_integral(y, prob, 2);
            CHECK(almost_equal(fi.g, y.g));
        }
    }
}

TEST_CASE("to_full_integral is linear in g") {
    PdeProblem prob = heat_problem();
    VarSet gv({"u0", "u1"});
    Polynomial g1 = parse_polynomial("u0 + 2 u1", gv);
    Polynomial g2 = parse_polynomial("u0 u1 - u1", gv);
    OutputFunctional y;
    y.kind = OutputFunctional::Kind::BoundaryPoint;
    y.side = 0;
    y.beta.orders = {1};
    y.g = csum({g1, 3.0 * g2});
    auto both = to_full_integral(y, prob, 2);
    y.g = g1;
    auto a = to_full_integral(y, prob, 2);
    y.g = g2;
    auto b = to_full_integral(y, prob, 2);
    CHECK(max_abs_coeff(csum({both.g, -a.g, -3.0 * b.g})) < 1e-12);
}

TEST_CASE("split rejects bad cut points") {
    PdeProblem prob = heat_problem();
    CHECK_THROWS_AS(split_at_point(prob, 0.0), Error);
    CHECK_THROWS_AS(split_at_point(prob, 1.0), Error);
    CHECK_THROWS_AS(split_subdomain(prob, 0.5, 0.5), Error);
    OutputFunctional y;
    y.kind = OutputFunctional::Kind::InteriorPoint;
    y.x0 = 1.5;
    y.g = parse_polynomial("u0", VarSet({"u0"}));
    y.beta.orders = {0};
    CHECK_THROWS_AS(to_full_integral(y, prob, 2), Error);
}
