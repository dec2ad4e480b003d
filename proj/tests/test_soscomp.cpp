#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pdebound/soscomp.hpp"

using namespace pdebound;

namespace {

SosProgram::Constraint simple(const std::string& name, Polynomial expr,
                              const VarSet& target, std::vector<Mono> basis) {
    SosProgram::Constraint c;
    c.name = name;
    c.expr = std::move(expr);
    c.target_vars = target;
    c.main_basis = std::move(basis);
    return c;
}

// expr = p + 1 * q{id} (the decision entering with coefficient one).
Polynomial with_decision(const Polynomial& p, int id) {
    VarSet full = canonical_vars({&p}, {SosProgram::sym(id)});
    Polynomial out = reordered(p, full);
    Mono m(static_cast<size_t>(full.size()), 0);
    m[(size_t)full.index(SosProgram::sym(id))] = 1;
    Polynomial dterm(full);
    dterm.set_coeff(m, 1.0);
    return csum({out, dterm});
}

}  // namespace

TEST_CASE("monomial basis enumeration") {
    VarSet vs({"t", "x"});
    auto b1 = monomial_basis(vs, 2);
    CHECK(b1.size() == 6);  // 1 t x t2 tx x2

    BasisCaps caps;
    caps.per_var = {{"t", 1}, {"x", 2}};
    auto b2 = monomial_basis(vs, 3, caps);
    // t<=1, x<=2, total<=3: (0,0)(0,1)(0,2)(1,0)(1,1)(1,2)
    CHECK(b2.size() == 6);

    VarSet vj({"t", "u0", "u1"});
    BasisCaps jc;
    jc.jet_total = 1;
    auto b3 = monomial_basis(vj, 2, jc);
    // total<=2, jet part <=1: 1 t t2 u0 u1 t u0 t u1
    CHECK(b3.size() == 7);

    BasisCaps tc;
    tc.tx_total = 1;
    VarSet vtx({"t", "x", "u0"});
    auto b4 = monomial_basis(vtx, 2, tc);
    // (t,x) combined degree <=1: 1 t x u0 u0^2 t u0 x u0
    CHECK(b4.size() == 7);
}

TEST_CASE("sos of (x-1)^2") {
    SosProgram sp;
    VarSet vx({"x"});
    Polynomial p = parse_polynomial("x^2 - 2 x + 1", vx);
    sp.add_sos(simple("c", p, vx, monomial_basis(vx, 1)));
    auto sol = sos_solve(sp);
    CHECK(sol.status == SolveStatus::Optimal);
    REQUIRE(sol.grams.size() == 1);
    CHECK(sol.grams[0].residual < 1e-5);
    const Eigen::MatrixXd& G = sol.grams[0].main;
    // Gram over (1, x) is uniquely [[1,-1],[-1,1]]
    CHECK(G(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(G(1, 1) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(G(0, 1) == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("sos of x^4 + 2x^2 + 1") {
    SosProgram sp;
    VarSet vx({"x"});
    Polynomial p = parse_polynomial("x^4 + 2 x^2 + 1", vx);
    sp.add_sos(simple("c", p, vx, monomial_basis(vx, 2)));
    auto sol = sos_solve(sp);
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(sol.grams[0].residual < 1e-5);
}

TEST_CASE("motzkin polynomial is not SOS") {
    SosProgram sp;
    VarSet vs({"x", "y"});
    Polynomial p = parse_polynomial("x^4 y^2 + x^2 y^4 - 3 x^2 y^2 + 1", vs);
    sp.add_sos(simple("c", p, vs, monomial_basis(vs, 3)));
    auto sol = sos_solve(sp);
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("decision variable: min gamma with x^2 - x + gamma sos") {
    SosProgram sp;
    int g = sp.add_decision("gamma");
    VarSet vx({"x"});
    Polynomial expr = with_decision(parse_polynomial("x^2 - x", vx), g);
    sp.add_sos(simple("c", expr, vx, monomial_basis(vx, 1)));
    sp.set_objective({{g, 1.0}});
    auto sol = sos_solve(sp);
    CHECK(sol.status == SolveStatus::Optimal);
    // min gamma s.t. x^2 - x + gamma >= 0  ->  gamma = 1/4
    CHECK(sol.decisions[g] == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(sol.objective == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("template helper builds affine decision polynomial") {
    SosProgram sp;
    VarSet vx({"x"});
    auto basis = monomial_basis(vx, 2);
    Polynomial tpl = sp.add_template("b", vx, basis);
    REQUIRE(sp.templates().size() == 1);
    CHECK(sp.templates()[0].ids.size() == 3);
    CHECK(sp.ndecisions() == 3);
    Eigen::VectorXd d(3);
    d << 1.0, 2.0, 3.0;
    Polynomial got = substitute_decisions(tpl, d);
    CHECK(almost_equal(got, parse_polynomial("1 + 2 x + 3 x^2", got.vars())));
}

TEST_CASE("multiplier constraint: x - x^3 >= 0 on [0,1] via g = x(1-x)") {
    SosProgram sp;
    VarSet vx({"x"});
    auto c = simple("c", parse_polynomial("x - x^3", vx), vx, monomial_basis(vx, 2));
    c.multipliers.push_back({parse_polynomial("x - x^2", vx), monomial_basis(vx, 1)});
    sp.add_sos(c);
    auto sol = sos_solve(sp);
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(sol.grams[0].residual < 1e-5);
    CHECK(sol.grams[0].mults.size() == 1);
}

TEST_CASE("fix pins a decision variable") {
    VarSet vx({"x"});
    {
        SosProgram sp;
        int g = sp.add_decision("gamma");
        Polynomial expr = with_decision(parse_polynomial("x^2 - x", vx), g);
        sp.add_sos(simple("c", expr, vx, monomial_basis(vx, 1)));
        sp.fix(g, 0.5);
        sp.set_objective({{g, 1.0}});
        auto sol = sos_solve(sp);
        CHECK(sol.status == SolveStatus::Optimal);
        CHECK(sol.decisions[g] == doctest::Approx(0.5).epsilon(1e-4));
    }
    {
        SosProgram sp;
        int g = sp.add_decision("gamma");
        Polynomial expr = with_decision(parse_polynomial("x^2 - x", vx), g);
        sp.add_sos(simple("c", expr, vx, monomial_basis(vx, 1)));
        sp.fix(g, 0.1);  // below the 0.25 minimum -> infeasible
        auto sol = sos_solve(sp);
        CHECK(sol.status == SolveStatus::Infeasible);
    }
}

TEST_CASE("monomial outside basis span is an error") {
    SosProgram sp;
    VarSet vx({"x"});
    Polynomial p = parse_polynomial("x^4 + 1", vx);
    sp.add_sos(simple("c", p, vx, monomial_basis(vx, 1)));
    CHECK_THROWS_AS((void)sp.compile(), Error);
}

TEST_CASE("non-affine decision use is an error") {
    SosProgram sp;
    int g = sp.add_decision("gamma");
    VarSet vx({"x"});
    Polynomial lin = with_decision(Polynomial(vx), g);
    Polynomial quad = cmul(lin, lin);  // q^2 term
    sp.add_sos(simple("c", quad, vx, monomial_basis(vx, 1)));
    CHECK_THROWS_AS((void)sp.compile(), Error);
}

TEST_CASE("gram_poly reconstructs the quadratic form") {
    VarSet vx({"x"});
    auto basis = monomial_basis(vx, 1);
    Eigen::MatrixXd G(2, 2);
    G << 1, -1, -1, 1;
    Polynomial p = gram_poly(G, vx, basis);
    CHECK(almost_equal(p, parse_polynomial("1 - 2 x + x^2", p.vars())));
}

TEST_CASE("dump is deterministic") {
    SosProgram sp;
    sp.add_decision("gamma");
    VarSet vx({"x"});
    sp.add_sos(simple("c", parse_polynomial("x^2 + 1", vx), vx, monomial_basis(vx, 1)));
    CHECK(sp.dump() == sp.dump());
    CHECK(sp.dump().find("c") != std::string::npos);
}
