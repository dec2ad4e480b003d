#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "pdebound/conic.hpp"

using namespace pdebound;

namespace {

using Trip = Eigen::Triplet<double>;

ConicProgram make_program(int n, int m, const std::vector<Trip>& trips,
                          const std::vector<double>& c, const std::vector<double>& h,
                          std::vector<ConeBlock> blocks) {
    ConicProgram p;
    p.c = Eigen::Map<const Eigen::VectorXd>(c.data(), n);
    p.h = Eigen::Map<const Eigen::VectorXd>(h.data(), m);
    p.A.resize(m, n);
    p.A.setFromTriplets(trips.begin(), trips.end());
    p.blocks = std::move(blocks);
    return p;
}

}  // namespace

TEST_CASE("svec/smat round trip") {
    Eigen::MatrixXd M(3, 3);
    M << 2, 1, 0.5, 1, 3, -1, 0.5, -1, 4;
    Eigen::VectorXd v = svec(M);
    CHECK(v.size() == 6);
    Eigen::MatrixXd back = smat(v, 3);
    CHECK((back - M).cwiseAbs().maxCoeff() < 1e-14);
    // svec preserves the trace inner product
    Eigen::MatrixXd N = Eigen::MatrixXd::Random(3, 3);
    N = (N + N.transpose()).eval();
    CHECK(svec(M).dot(svec(N)) == doctest::Approx((M * N).trace()));
}

TEST_CASE("project_psd clips negative eigenvalues") {
    Eigen::MatrixXd M(2, 2);
    M << 1, 0, 0, -2;
    Eigen::MatrixXd P = project_psd(M);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    CHECK(P(0, 0) == doctest::Approx(1.0));
    CHECK(P(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("lp optimal") {
    // min -x1-x2  s.t.  x1+x2+s = 1,  (x1,x2,s) >= 0; optimum -1
    auto p = make_program(3, 1, {{0, 0, 1}, {0, 1, 1}, {0, 2, 1}}, {-1, -1, 0}, {1},
                          {{ConeBlock::NonNeg, 3}});
    auto sol = solve(p, {});
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(p.c.dot(sol.z) == doctest::Approx(-1.0).epsilon(1e-5));
    auto r = residuals(p, sol);
    CHECK(r.primal < 1e-6);
    CHECK(r.dual < 1e-6);
    CHECK(r.gap < 1e-5);
}

TEST_CASE("lp with free variables") {
    // min y  s.t.  y - s1 = 1 (y >= 1 via slack), y free, s1 >= 0
    auto p = make_program(2, 1, {{0, 0, 1}, {0, 1, -1}}, {1, 0}, {1},
                          {{ConeBlock::Free, 1}, {ConeBlock::NonNeg, 1}});
    auto sol = solve(p, {});
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.z(0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("lp infeasible yields certificate") {
    // x = -1 with x >= 0
    auto p = make_program(1, 1, {{0, 0, 1}}, {0}, {-1}, {{ConeBlock::NonNeg, 1}});
    auto sol = solve(p, {});
    REQUIRE(sol.status == SolveStatus::Infeasible);
    REQUIRE(sol.infeas_ray.size() == 1);
    // certificate: h'ray > 0 (normalized to 1), A'ray in the polar of K
    CHECK(p.h.dot(sol.infeas_ray) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK((p.A.transpose() * sol.infeas_ray)(0) < 1e-5);
}

TEST_CASE("lp unbounded") {
    // min -x1  s.t.  x1 - x2 = 0, x >= 0 ; ray (1,1) improves without bound
    auto p = make_program(2, 1, {{0, 0, 1}, {0, 1, -1}}, {-1, 0}, {0},
                          {{ConeBlock::NonNeg, 2}});
    auto sol = solve(p, {});
    CHECK(sol.status == SolveStatus::Unbounded);
}

TEST_CASE("sdp min eigenvalue shift") {
    // min t  s.t.  X = C + t*I psd; optimal t = -lambda_min(C) = 1
    Eigen::MatrixXd C(2, 2);
    C << 1, 2, 2, 1;  // eigenvalues -1 and 3
    Eigen::VectorXd sc = svec(C);
    Eigen::VectorXd si = svec(Eigen::MatrixXd::Identity(2, 2));
    std::vector<Trip> trips;
    for (int i = 0; i < 3; ++i) {
        if (si(i) != 0.0) trips.emplace_back(i, 0, -si(i));
        trips.emplace_back(i, 1 + i, 1.0);
    }
    auto p = make_program(4, 3, trips, {1, 0, 0, 0}, {sc(0), sc(1), sc(2)},
                          {{ConeBlock::Free, 1}, {ConeBlock::Psd, 2}});
    auto sol = solve(p, {});
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.z(0) == doctest::Approx(1.0).epsilon(1e-4));
    Eigen::MatrixXd X = smat(sol.z.tail(3), 2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
    CHECK(es.eigenvalues().minCoeff() > -1e-5);
}

TEST_CASE("sdp random feasibility cross-check") {
    // min tr(X)  s.t.  <A_i,X> = <A_i,X0> with X0 psd known feasible
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    const int n = 3, sv = 6, k = 2;
    Eigen::MatrixXd R(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) R(i, j) = g(rng);
    Eigen::MatrixXd X0 = R * R.transpose();
    std::vector<Trip> trips;
    std::vector<double> h;
    std::vector<Eigen::MatrixXd> As;
    for (int i = 0; i < k; ++i) {
        Eigen::MatrixXd Ai(n, n);
        for (int r = 0; r < n; ++r)
            for (int c2 = 0; c2 < n; ++c2) Ai(r, c2) = g(rng);
        Ai = (Ai + Ai.transpose()).eval();
        As.push_back(Ai);
        Eigen::VectorXd a = svec(Ai);
        for (int j = 0; j < sv; ++j)
            if (a(j) != 0) trips.emplace_back(i, j, a(j));
        h.push_back(a.dot(svec(X0)));
    }
    Eigen::VectorXd tr = svec(Eigen::MatrixXd::Identity(n, n));
    std::vector<double> c(tr.data(), tr.data() + sv);
    auto p = make_program(sv, k, trips, c, h, {{ConeBlock::Psd, n}});
    auto sol = solve(p, {});
    REQUIRE(sol.status == SolveStatus::Optimal);
    Eigen::MatrixXd X = smat(sol.z, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
    CHECK(es.eigenvalues().minCoeff() > -1e-5);
    for (int i = 0; i < k; ++i)
        CHECK((X * As[i]).trace() == doctest::Approx(h[i]).epsilon(1e-4));
    // optimal objective cannot exceed the feasible point's
    CHECK(X.trace() <= X0.trace() + 1e-4);
}

TEST_CASE("residuals flag a corrupted solution") {
    auto p = make_program(3, 1, {{0, 0, 1}, {0, 1, 1}, {0, 2, 1}}, {-1, -1, 0}, {1},
                          {{ConeBlock::NonNeg, 3}});
    auto sol = solve(p, {});
    REQUIRE(sol.status == SolveStatus::Optimal);
    sol.z(0) += 0.5;
    CHECK(residuals(p, sol).primal > 0.4);
}

TEST_CASE("program dump is deterministic") {
    auto p = make_program(1, 1, {{0, 0, 2.0}}, {1}, {3}, {{ConeBlock::NonNeg, 1}});
    CHECK(p.dump() == p.dump());
    CHECK(p.dump().find("nonneg:1") != std::string::npos);
}

TEST_CASE("validate rejects inconsistent sizes") {
    auto p = make_program(1, 1, {{0, 0, 1.0}}, {1}, {3}, {{ConeBlock::NonNeg, 2}});
    CHECK_THROWS(p.validate());
}
