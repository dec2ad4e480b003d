#include "pdebound/oracle.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <ostream>

namespace pdebound {

namespace {

struct BcRow {
    int end = 0;  // 0: x=0, 1: x=1
    std::vector<double> coef;  // per jet order 0..alpha-1
};

// Classifies Q rows as single-end linear conditions. Columns stack the x=1
// jets first, then the x=0 jets.
std::vector<BcRow> parse_bcs(const PdeProblem& prob) {
    int nj = prob.alpha.orders[0];
    std::vector<BcRow> rows;
    for (int r = 0; r < prob.Q.rows(); ++r) {
        bool hi = false, lo = false;
        for (int j = 0; j < nj; ++j) {
            if (prob.Q(r, j) != 0.0) hi = true;
            if (prob.Q(r, nj + j) != 0.0) lo = true;
        }
        if (hi && lo)
            throw Error("oracle: boundary rows coupling both ends are not supported");
        if (!hi && !lo) continue;
        BcRow b;
        b.end = hi ? 1 : 0;
        b.coef.resize(static_cast<size_t>(nj));
        for (int j = 0; j < nj; ++j) b.coef[static_cast<size_t>(j)] = prob.Q(r, (hi ? 0 : nj) + j);
        rows.push_back(b);
    }
    return rows;
}

// One-sided second-order first/second derivative stencils on 4 nodes from an
// end, oriented from the boundary inward (sign of odd orders flips at x=1).
void bc_stencil(const BcRow& b, double h, int nx, std::vector<std::pair<int, double>>& out) {
    out.clear();
    int i0 = b.end == 0 ? 0 : nx - 1;
    int dir = b.end == 0 ? 1 : -1;
    auto add = [&](int off, double v) {
        if (v == 0.0) return;
        int idx = i0 + dir * off;
        for (auto& e : out)
            if (e.first == idx) {
                e.second += v;
                return;
            }
        out.push_back({idx, v});
    };
    for (size_t j = 0; j < b.coef.size(); ++j) {
        double c = b.coef[j];
        if (c == 0.0) continue;
        switch (j) {
            case 0:
                add(0, c);
                break;
            case 1: {
                double s = dir;  // derivative flips sign at the right end
                add(0, c * s * -3.0 / (2 * h));
                add(1, c * s * 4.0 / (2 * h));
                add(2, c * s * -1.0 / (2 * h));
                break;
            }
            default:
                throw Error("oracle: boundary jet order > 1 not supported");
        }
    }
}

struct Linearized {
    std::vector<Polynomial> coef;  // L_j(x) for jet order j (0..2)
    Polynomial rest;               // everything else (explicit part)
};

Linearized split_linear(const Polynomial& F) {
    Linearized out;
    out.coef.assign(3, Polynomial());
    Polynomial rest(F.vars());
    const VarSet& vs = F.vars();
    int it = vs.index("t");
    for (const auto& [m, c] : F.terms()) {
        int jorder = -1, jexp = 0;
        bool higher = false;
        for (int i = 0; i < vs.size(); ++i) {
            auto jv = parse_jet_name(vs.name(i));
            if (!jv || m[static_cast<size_t>(i)] == 0) continue;
            jexp += m[static_cast<size_t>(i)];
            jorder = jv->order;
            if (jv->order > 2) higher = true;
        }
        if (higher) throw Error("oracle: jets above order 2 are not supported");
        bool tdep = it >= 0 && m[static_cast<size_t>(it)] > 0;
        if (jexp == 1 && !tdep) {
            // linear autonomous term: coefficient is a polynomial in x
            Polynomial cx(VarSet({"x"}));
            int ix = vs.index("x");
            Mono nm{ix >= 0 ? m[static_cast<size_t>(ix)] : 0};
            cx.set_coeff(nm, c);
            auto& tgt = out.coef[static_cast<size_t>(jorder)];
            tgt = tgt.is_zero() ? cx : csum({tgt, cx});
        } else {
            Polynomial term(vs);
            term.set_coeff(m, c);
            rest = csum({rest, term});
        }
    }
    out.rest = compacted(rest);
    return out;
}

}  // namespace

double grid_jet(const Eigen::VectorXd& u, double h, int i, int order) {
    const int n = static_cast<int>(u.size());
    switch (order) {
        case 0:
            return u[i];
        case 1:
            if (i == 0) return (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h);
            if (i == n - 1) return (3 * u[n - 1] - 4 * u[n - 2] + u[n - 3]) / (2 * h);
            return (u[i + 1] - u[i - 1]) / (2 * h);
        case 2:
            if (i == 0) return (2 * u[0] - 5 * u[1] + 4 * u[2] - u[3]) / (h * h);
            if (i == n - 1)
                return (2 * u[n - 1] - 5 * u[n - 2] + 4 * u[n - 3] - u[n - 4]) / (h * h);
            return (u[i + 1] - 2 * u[i] + u[i - 1]) / (h * h);
        default:
            throw Error("oracle: jet order beyond stencil support");
    }
}

GridSolution simulate(const PdeProblem& prob, const SimOptions& opts) {
    if (prob.n != 1)
        throw Error("oracle: only single-component problems are simulated; "
                    "simulate the original unsplit problem instead");
    if (opts.nx < 11) throw Error("oracle: nx must be >= 11");
    if (!(opts.dt > 0)) throw Error("oracle: dt must be positive");
    const int nx = opts.nx;
    const double h = 1.0 / (nx - 1);

    Linearized lin = split_linear(prob.F[0]);
    std::vector<BcRow> bcs = parse_bcs(prob);

    // dense L_j(x_i)
    std::vector<Eigen::VectorXd> L(3, Eigen::VectorXd::Zero(nx));
    for (int j = 0; j < 3; ++j)
        if (!lin.coef[static_cast<size_t>(j)].is_zero())
            for (int i = 0; i < nx; ++i)
                L[static_cast<size_t>(j)][i] =
                    evaluate(lin.coef[static_cast<size_t>(j)], {{"x", i * h}});

    if (opts.scheme == SimOptions::Scheme::ExplicitRk4) {
        double k = L[2].cwiseAbs().maxCoeff();
        if (k > 0 && opts.dt > 0.5 * h * h / k)
            throw Error("oracle: explicit scheme unstable, need dt <= 0.5 h^2 / k = " +
                        std::to_string(0.5 * h * h / k));
    }

    // A: interior central-difference rows of the linear autonomous part.
    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    for (int i = 1; i + 1 < nx; ++i) {
        if (L[0][i] != 0.0) trips.push_back({i, i, L[0][i]});
        if (L[1][i] != 0.0) {
            trips.push_back({i, i - 1, -L[1][i] / (2 * h)});
            trips.push_back({i, i + 1, L[1][i] / (2 * h)});
        }
        if (L[2][i] != 0.0) {
            trips.push_back({i, i - 1, L[2][i] / (h * h)});
            trips.push_back({i, i, -2 * L[2][i] / (h * h)});
            trips.push_back({i, i + 1, L[2][i] / (h * h)});
        }
    }
    Eigen::SparseMatrix<double> A(nx, nx);
    A.setFromTriplets(trips.begin(), trips.end());

    const bool has_rest = !lin.rest.is_zero();
    const bool rest_has_x = lin.rest.vars().contains("x");
    auto eval_rest = [&](double t, const Eigen::VectorXd& u, Eigen::VectorXd& out) {
        out.setZero();
        if (!has_rest) return;
        std::map<std::string, double> pt{{"t", t}};
        for (int i = 1; i + 1 < nx; ++i) {
            if (rest_has_x) pt["x"] = i * h;
            for (int j = 0; j <= 2; ++j) {
                std::string n = jet_name(0, j, 1);
                if (lin.rest.vars().contains(n)) pt[n] = grid_jet(u, h, i, j);
            }
            out[i] = evaluate(lin.rest, pt);
        }
    };

    // Boundary condition rows (replace the PDE at the end nodes).
    std::vector<std::vector<std::pair<int, double>>> bcrows;
    std::vector<int> bcnode;
    for (const auto& b : bcs) {
        std::vector<std::pair<int, double>> row;
        bc_stencil(b, h, nx, row);
        bcrows.push_back(row);
        bcnode.push_back(b.end == 0 ? 0 : nx - 1);
    }
    // Enforces the BC rows by solving for the end-node values.
    auto apply_bcs = [&](Eigen::VectorXd& u) {
        for (size_t r = 0; r < bcrows.size(); ++r) {
            double diag = 0, rest = 0;
            for (const auto& [idx, v] : bcrows[r]) {
                if (idx == bcnode[r])
                    diag += v;
                else
                    rest += v * u[idx];
            }
            if (diag == 0.0) throw Error("oracle: degenerate boundary row");
            u[bcnode[r]] = -rest / diag;
        }
    };

    const int nsteps = std::max(1, static_cast<int>(std::llround(prob.T / opts.dt)));
    const double dt = prob.T / nsteps;
    int stride = std::max(1, (nsteps + opts.max_saves - 1) / std::max(1, opts.max_saves - 1));

    Eigen::VectorXd u(nx);
    for (int i = 0; i < nx; ++i)
        u[i] = opts.u0_override ? opts.u0_override(i * h)
                                : evaluate(prob.u0[0], {{"x", i * h}});
    apply_bcs(u);

    GridSolution sol;
    sol.nx = nx;
    sol.dt = dt;
    sol.times.push_back(0.0);
    sol.values.push_back(u);

    Eigen::VectorXd n0(nx), nmid(nx), rhs(nx), ustar(nx);

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::SparseMatrix<double> M(nx, nx);
    std::vector<bool> endrow(static_cast<size_t>(nx), false);
    if (opts.scheme == SimOptions::Scheme::CrankNicolson) {
        // M = I - dt/2 A on interior rows; BC rows at the ends.
        std::vector<Trip> mt;
        for (int i = 1; i + 1 < nx; ++i) mt.push_back({i, i, 1.0});
        for (int k = 0; k < A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
                mt.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()),
                              -0.5 * dt * it.value()});
        for (size_t r = 0; r < bcrows.size(); ++r) {
            endrow[static_cast<size_t>(bcnode[r])] = true;
            for (const auto& [idx, v] : bcrows[r]) mt.push_back({bcnode[r], idx, v});
        }
        // Unconstrained end nodes keep an identity row (value frozen).
        if (!endrow[0]) mt.push_back({0, 0, 1.0});
        if (!endrow[static_cast<size_t>(nx - 1)]) mt.push_back({nx - 1, nx - 1, 1.0});
        M.setFromTriplets(mt.begin(), mt.end());
        lu.compute(M);
        if (lu.info() != Eigen::Success) throw Error("oracle: time-step factorization failed");
    }

    double t = 0.0;
    for (int step = 1; step <= nsteps; ++step) {
        if (opts.scheme == SimOptions::Scheme::CrankNicolson) {
            eval_rest(t, u, n0);
            // midpoint predictor for the explicit part
            ustar = u + 0.5 * dt * (A * u + n0);
            apply_bcs(ustar);
            eval_rest(t + 0.5 * dt, ustar, nmid);
            rhs = u + 0.5 * dt * (A * u) + dt * nmid;
            if (!endrow[0]) rhs[0] = u[0];
            if (!endrow[static_cast<size_t>(nx - 1)]) rhs[nx - 1] = u[nx - 1];
            for (size_t r = 0; r < bcrows.size(); ++r) rhs[bcnode[r]] = 0.0;
            u = lu.solve(rhs);
        } else {
            auto f = [&](double tt, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
                eval_rest(tt, v, out);
                out += A * v;
                out[0] = 0;
                out[nx - 1] = 0;
            };
            Eigen::VectorXd k1(nx), k2(nx), k3(nx), k4(nx), tmp(nx);
            f(t, u, k1);
            tmp = u + 0.5 * dt * k1;
            apply_bcs(tmp);
            f(t + 0.5 * dt, tmp, k2);
            tmp = u + 0.5 * dt * k2;
            apply_bcs(tmp);
            f(t + 0.5 * dt, tmp, k3);
            tmp = u + dt * k3;
            apply_bcs(tmp);
            f(t + dt, tmp, k4);
            u += (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
            apply_bcs(u);
        }
        t = step * dt;
        double mag = u.cwiseAbs().maxCoeff();
        if (!std::isfinite(mag) || mag > 1e12)
            throw Error("oracle: solution blow-up at t = " + std::to_string(t));
        if (step % stride == 0 || step == nsteps) {
            sol.times.push_back(t);
            sol.values.push_back(u);
        }
    }
    return sol;
}

double output_value_at(const GridSolution& sol, const OutputFunctional& y, int k) {
    const Eigen::VectorXd& u = sol.values[static_cast<size_t>(k)];
    const double h = sol.h(), t = sol.times[static_cast<size_t>(k)];
    int maxj = 0;
    for (const auto& n : y.g.vars().names())
        if (auto jv = parse_jet_name(n)) maxj = std::max(maxj, jv->order);
    if (maxj > 2) throw Error("oracle: requested jet order beyond stencil support");

    auto g_at = [&](int i) {
        std::map<std::string, double> pt{{"t", t}, {"x", i * h}};
        for (int j = 0; j <= maxj; ++j) pt[jet_name(0, j, 1)] = grid_jet(u, h, i, j);
        return evaluate(y.g, pt);
    };
    auto g_interp = [&](double x0) {
        double s = x0 / h;
        int i = std::min(static_cast<int>(s), sol.nx - 2);
        double frac = s - i;
        std::map<std::string, double> pt{{"t", t}, {"x", x0}};
        for (int j = 0; j <= maxj; ++j)
            pt[jet_name(0, j, 1)] = (1 - frac) * grid_jet(u, h, i, j) +
                                    frac * grid_jet(u, h, i + 1, j);
        return evaluate(y.g, pt);
    };

    switch (y.kind) {
        case OutputFunctional::Kind::BoundaryPoint:
            return g_at(y.side == 0 ? 0 : sol.nx - 1);
        case OutputFunctional::Kind::InteriorPoint:
            return g_interp(y.x0);
        case OutputFunctional::Kind::SubdomainIntegral:
        case OutputFunctional::Kind::FullIntegral: {
            double lo = y.kind == OutputFunctional::Kind::FullIntegral ? 0.0 : y.x1;
            double hi = y.kind == OutputFunctional::Kind::FullIntegral ? 1.0 : y.x2;
            // composite trapezoid on the grid restricted to [lo, hi], with
            // interpolated partial cells at the ends
            int ilo = static_cast<int>(std::ceil(lo / h - 1e-12));
            int ihi = static_cast<int>(std::floor(hi / h + 1e-12));
            double sum = 0;
            for (int i = ilo; i < ihi; ++i) sum += 0.5 * h * (g_at(i) + g_at(i + 1));
            if (ilo * h > lo) sum += 0.5 * (ilo * h - lo) * (g_interp(lo) + g_at(ilo));
            if (ihi * h < hi) sum += 0.5 * (hi - ihi * h) * (g_at(ihi) + g_interp(hi));
            return sum;
        }
    }
    throw Error("oracle: unknown functional kind");
}

double output_value(const GridSolution& sol, const OutputFunctional& y) {
    if (!y.time_integrated)
        return output_value_at(sol, y, static_cast<int>(sol.times.size()) - 1);
    double sum = 0;
    for (size_t k = 0; k + 1 < sol.times.size(); ++k) {
        double w = sol.times[k + 1] - sol.times[k];
        sum += 0.5 * w *
               (output_value_at(sol, y, static_cast<int>(k)) +
                output_value_at(sol, y, static_cast<int>(k) + 1));
    }
    return sum;
}

void export_trajectory(const GridSolution& sol, std::ostream& os) {
    os << "t";
    for (int i = 0; i < sol.nx; ++i) os << " " << i * sol.h();
    os << "\n";
    for (size_t k = 0; k < sol.times.size(); ++k) {
        os << sol.times[k];
        for (int i = 0; i < sol.nx; ++i) os << " " << sol.values[k][i];
        os << "\n";
    }
}

}  // namespace pdebound
