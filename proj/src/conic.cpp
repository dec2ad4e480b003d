#include "pdebound/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "pdebound/kernels.hpp"

namespace pdebound {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;

double inf_norm(const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}
}

int ConicProgram::nvars() const {
    int n = 0;
    for (const auto& b : blocks) n += b.dim();
    return n;
}

void ConicProgram::validate() const {
    int n = nvars();
    if (A.cols() != n)
        throw std::runtime_error("conic: A has " + std::to_string(A.cols()) +
                                 " columns, cone blocks give " + std::to_string(n));
    if (A.rows() != h.size()) throw std::runtime_error("conic: A rows != h size");
    if (c.size() != n) throw std::runtime_error("conic: c size != nvars");
    for (const auto& b : blocks)
        if (b.size < 1) throw std::runtime_error("conic: block size must be >= 1");
}

std::string ConicProgram::dump() const {
    std::ostringstream os;
    os << "conic-program v1\n";
    os << "vars " << nvars() << " rows " << A.rows() << "\n";
    os << "blocks";
    for (const auto& b : blocks) {
        const char* k = b.kind == ConeBlock::Free ? "free"
                        : b.kind == ConeBlock::NonNeg ? "nonneg"
                                                      : "psd";
        os << " " << k << ":" << b.size;
    }
    os << "\nobjective";
    for (int i = 0; i < c.size(); ++i)
        if (c[i] != 0.0) os << " " << i << ":" << c[i];
    os << "\nrhs";
    for (int i = 0; i < h.size(); ++i)
        if (h[i] != 0.0) os << " " << i << ":" << h[i];
    os << "\ncoo\n";
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            os << it.row() << " " << it.col() << " " << it.value() << "\n";
    return os.str();
}

Eigen::VectorXd svec(const Eigen::MatrixXd& S) {
    int k = static_cast<int>(S.rows());
    Eigen::VectorXd v(k * (k + 1) / 2);
    int idx = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j <= i; ++j)
            v[idx++] = i == j ? S(i, i) : kSqrt2 * 0.5 * (S(i, j) + S(j, i));
    return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v, int side) {
    Eigen::MatrixXd S(side, side);
    int idx = 0;
    for (int i = 0; i < side; ++i)
        for (int j = 0; j <= i; ++j) {
            double val = i == j ? v[idx] : v[idx] / kSqrt2;
            S(i, j) = val;
            S(j, i) = val;
            ++idx;
        }
    return S;
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

// Homogeneous self-dual embedding of
//   min c'x  s.t.  A_ext x + s = b,  s in K_s
// where x collects all original variables as free scalars and K_s stacks a
// zero cone (equality rows) with the original nonneg/psd blocks.
struct Embedding {
    int n = 0;   // variables
    int m = 0;   // extended rows
    int m_eq = 0;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Arm;
    Eigen::MatrixXd Acm;  // column-major copy for transpose products
    Eigen::VectorXd b, c;
    // cone layout of s rows after the zero cone
    struct SBlock {
        ConeBlock::Kind kind;
        int size;
        int offset;  // row offset in s
    };
    std::vector<SBlock> sblocks;
    // scaling
    Eigen::VectorXd D, E;  // row/col scalings of A_ext
    double sigma_b = 1, sigma_c = 1;

    Eigen::LLT<Eigen::MatrixXd> llt;  // I + A'A
    Eigen::VectorXd gsol;             // M^{-1} [c;b]
    double qg_denom = 1;

    void matvec_A(const double* x, double* out) const {
        const auto& ops = kernels::active_ops();
        for (int i = 0; i < m; ++i) out[i] = ops.dot(Arm.data() + i * n, x, (size_t)n);
    }
    void matvec_At(const double* y, double* out) const {
        const auto& ops = kernels::active_ops();
        for (int j = 0; j < n; ++j) out[j] = ops.dot(Acm.data() + j * m, y, (size_t)m);
    }
};

Embedding build_embedding(const ConicProgram& p) {
    Embedding e;
    e.n = p.nvars();
    e.m_eq = static_cast<int>(p.A.rows());
    int ncone_rows = 0;
    int off = 0;
    std::vector<std::pair<int, ConeBlock>> cone_cols;  // (col offset, block)
    for (const auto& b : p.blocks) {
        if (b.kind != ConeBlock::Free) {
            cone_cols.emplace_back(off, b);
            ncone_rows += b.dim();
        }
        off += b.dim();
    }
    e.m = e.m_eq + ncone_rows;
    e.Arm.setZero(e.m, e.n);
    for (int k = 0; k < p.A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, k); it; ++it)
            e.Arm(it.row(), it.col()) = it.value();
    int roff = e.m_eq;
    for (auto& [coff, blk] : cone_cols) {
        e.sblocks.push_back({blk.kind, blk.size, roff});
        for (int i = 0; i < blk.dim(); ++i) e.Arm(roff + i, coff + i) = -1.0;
        roff += blk.dim();
    }
    e.b.setZero(e.m);
    e.b.head(e.m_eq) = p.h;
    e.c = p.c;
    return e;
}

void equilibrate(Embedding& e) {
    // Modified Ruiz: PSD row groups get one uniform scale so cone membership
    // of the scaled s is preserved.
    e.D = Eigen::VectorXd::Ones(e.m);
    e.E = Eigen::VectorXd::Ones(e.n);
    for (int pass = 0; pass < 10; ++pass) {
        Eigen::VectorXd rnorm(e.m), cnorm(e.n);
        for (int i = 0; i < e.m; ++i) rnorm[i] = e.Arm.row(i).cwiseAbs().maxCoeff();
        for (int j = 0; j < e.n; ++j) cnorm[j] = e.Arm.col(j).cwiseAbs().maxCoeff();
        for (auto& sb : e.sblocks) {
            if (sb.kind != ConeBlock::Psd) continue;
            int d = sb.size * (sb.size + 1) / 2;
            double g = 0;
            for (int i = 0; i < d; ++i) g = std::max(g, rnorm[sb.offset + i]);
            for (int i = 0; i < d; ++i) rnorm[sb.offset + i] = g;
        }
        bool done = true;
        for (int i = 0; i < e.m; ++i) {
            double s = rnorm[i] > 1e-12 ? 1.0 / std::sqrt(rnorm[i]) : 1.0;
            if (std::abs(1.0 - s) > 1e-3) done = false;
            e.Arm.row(i) *= s;
            e.D[i] *= s;
        }
        for (int j = 0; j < e.n; ++j) {
            double s = cnorm[j] > 1e-12 ? 1.0 / std::sqrt(cnorm[j]) : 1.0;
            if (std::abs(1.0 - s) > 1e-3) done = false;
            e.Arm.col(j) *= s;
            e.E[j] *= s;
        }
        if (done) break;
    }
    // Scaled problem data: b_hat = sigma_b * D b, c_hat = sigma_c * E c.
    Eigen::VectorXd Db = e.D.asDiagonal() * e.b;
    Eigen::VectorXd Ec = e.E.asDiagonal() * e.c;
    double nb = Db.norm() / std::sqrt(std::max(1, e.m));
    double nc = Ec.norm() / std::sqrt(std::max(1, e.n));
    e.sigma_b = nb > 1e-10 ? 1.0 / nb : 1.0;
    e.sigma_c = nc > 1e-10 ? 1.0 / nc : 1.0;
    e.b = Db * e.sigma_b;
    e.c = Ec * e.sigma_c;
    e.Acm = e.Arm;
}

// Projection of the y part onto the dual cone K_s^*: equality duals free,
// nonneg duals clipped, psd duals eig-clipped.
void project_dual_cone(const Embedding& e, Eigen::VectorXd& y) {
    for (const auto& sb : e.sblocks) {
        if (sb.kind == ConeBlock::NonNeg) {
            for (int i = 0; i < sb.size; ++i)
                y[sb.offset + i] = std::max(0.0, y[sb.offset + i]);
        } else {
            int d = sb.size * (sb.size + 1) / 2;
            Eigen::MatrixXd S = smat(y.segment(sb.offset, d), sb.size);
            y.segment(sb.offset, d) = svec(project_psd(S));
        }
    }
}

// Cone projection of the s candidate (zero rows forced to 0).
void project_primal_cone(const Embedding& e, Eigen::VectorXd& s) {
    s.head(e.m_eq).setZero();
    project_dual_cone(e, s);  // nonneg and psd cones are self-dual
}

double cone_distance(const Embedding& e, const Eigen::VectorXd& s) {
    Eigen::VectorXd proj = s;
    project_primal_cone(e, proj);
    double d = 0;
    for (int i = 0; i < e.m; ++i) d = std::max(d, std::abs(proj[i] - s[i]));
    return d;
}

}  // namespace

ConicSolution solve(const ConicProgram& p, const SolveOptions& opts) {
    p.validate();
    Embedding e = build_embedding(p);
    equilibrate(e);

    const int n = e.n, m = e.m;
    if (opts.verbose)
        std::fprintf(stderr, "conic: n=%d m=%d (eq=%d)\n", n, m, e.m_eq);
    // Cache the reduced solve: (I + A'A) factorization.
    {
        Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
        M.noalias() += e.Acm.transpose() * e.Acm;
        e.llt.compute(M);
        if (e.llt.info() != Eigen::Success)
            throw std::runtime_error("conic: factorization failed");
    }
    auto solve_M = [&](const Eigen::VectorXd& r1, const Eigen::VectorXd& r2) {
        // M = [[I, A'],[-A, I]] : returns (zx, zy)
        Eigen::VectorXd tmp(n);
        e.matvec_At(r2.data(), tmp.data());
        Eigen::VectorXd zx = e.llt.solve(r1 - tmp);
        Eigen::VectorXd zy(m);
        e.matvec_A(zx.data(), zy.data());
        zy += r2;
        return std::make_pair(zx, zy);
    };
    {
        auto [gx, gy] = solve_M(e.c, e.b);
        e.gsol.resize(n + m);
        e.gsol << gx, gy;
        e.qg_denom = 1.0 + e.c.dot(gx) + e.b.dot(gy);
    }

    const double alpha = 1.5;  // over-relaxation
    ConicSolution sol;
    const double hinf = [&] {
        double v = 0;
        for (int i = 0; i < p.h.size(); ++i) v = std::max(v, std::abs(p.h[i]));
        return v;
    }();
    const double cinf = [&] {
        double v = 0;
        for (int i = 0; i < p.c.size(); ++i) v = std::max(v, std::abs(p.c[i]));
        return v;
    }();

    auto unscale_x = [&](const Eigen::VectorXd& xs) -> Eigen::VectorXd {
        return (e.E.asDiagonal() * xs) / e.sigma_b;
    };
    auto unscale_y_full = [&](const Eigen::VectorXd& ys) -> Eigen::VectorXd {
        return (e.D.asDiagonal() * ys) / e.sigma_c;
    };

    // One step of the over-relaxed HSDE splitting on the stacked state
    // S = (ux, uy, utau, vx, vy, vkappa).
    const int N = 2 * (n + m + 1);
    auto step = [&](const Eigen::VectorXd& S) -> Eigen::VectorXd {
        Eigen::VectorXd ux = S.segment(0, n), uy = S.segment(n, m);
        double utau = S[n + m];
        Eigen::VectorXd vx = S.segment(n + m + 1, n), vy = S.segment(2 * n + m + 1, m);
        double vkappa = S[N - 1];

        // utilde = (I+Q)^{-1} (u+v)
        Eigen::VectorXd wx = ux + vx, wy = uy + vy;
        double wtau = utau + vkappa;
        auto [px, py] = solve_M(wx, wy);
        double qp = e.c.dot(px) + e.b.dot(py);
        double ttau = (wtau + qp) / e.qg_denom;
        Eigen::VectorXd tx = px - ttau * e.gsol.head(n);
        Eigen::VectorXd ty = py - ttau * e.gsol.tail(m);

        // over-relaxed reflection; u = Pi_C(r) with C = R^n x K^* x R_+
        Eigen::VectorXd nux = alpha * tx + (1 - alpha) * ux - vx;
        Eigen::VectorXd nuy = alpha * ty + (1 - alpha) * uy - vy;
        double rtau = alpha * ttau + (1 - alpha) * utau - vkappa;
        project_dual_cone(e, nuy);
        double nutau = std::max(0.0, rtau);

        Eigen::VectorXd out(N);
        out.segment(0, n) = nux;
        out.segment(n, m) = nuy;
        out[n + m] = nutau;
        out.segment(n + m + 1, n) = vx + nux - (alpha * tx + (1 - alpha) * ux);
        out.segment(2 * n + m + 1, m) = vy + nuy - (alpha * ty + (1 - alpha) * uy);
        out[N - 1] = vkappa + nutau - (alpha * ttau + (1 - alpha) * utau);
        return out;
    };

    Eigen::VectorXd S = Eigen::VectorXd::Zero(N);
    S[n + m] = 1.0;
    S[N - 1] = 1.0;

    // Safeguarded Anderson acceleration (type II) on the fixed-point map:
    // an accelerated candidate is kept only if it shrinks the residual.
    const int aa_mem = 10;
    std::vector<Eigen::VectorXd> hs, hg;
    auto push_hist = [&](Eigen::VectorXd s, Eigen::VectorXd g) {
        hs.push_back(std::move(s));
        hg.push_back(std::move(g));
        if (static_cast<int>(hs.size()) > aa_mem + 1) {
            hs.erase(hs.begin());
            hg.erase(hg.begin());
        }
    };

    int it = 0;
    for (; it < opts.max_iters; ++it) {
        Eigen::VectorXd G = step(S);
        Eigen::VectorXd R = G - S;
        double rn = R.norm();
        push_hist(S, G);
        Eigen::VectorXd next = std::move(G);
        int mm = static_cast<int>(hs.size()) - 1;
        if (mm >= 1) {
            Eigen::MatrixXd dR(N, mm), dG(N, mm);
            for (int k = 0; k < mm; ++k) {
                dR.col(k) = (hg[static_cast<size_t>(k) + 1] - hs[static_cast<size_t>(k) + 1]) -
                            (hg[static_cast<size_t>(k)] - hs[static_cast<size_t>(k)]);
                dG.col(k) = hg[static_cast<size_t>(k) + 1] - hg[static_cast<size_t>(k)];
            }
            Eigen::MatrixXd AtA = dR.transpose() * dR;
            AtA.diagonal().array() += 1e-12 * (1.0 + AtA.trace());
            Eigen::VectorXd th = AtA.ldlt().solve(dR.transpose() * R);
            Eigen::VectorXd Saa = next - dG * th;
            Eigen::VectorXd Gaa = step(Saa);
            if ((Gaa - Saa).norm() < rn) {
                push_hist(Saa, Gaa);
                next = std::move(Gaa);
            }
        }
        S = std::move(next);

        if ((it + 1) % 25 != 0 && it + 1 != opts.max_iters) continue;

        Eigen::VectorXd ux = S.segment(0, n), uy = S.segment(n, m);
        double utau = S[n + m];
        Eigen::VectorXd vy = S.segment(2 * n + m + 1, m);

        double unorm = std::sqrt(ux.squaredNorm() + uy.squaredNorm() + utau * utau);
        if (utau > 1e-8 * std::max(1.0, unorm)) {
            Eigen::VectorXd x = unscale_x(ux / utau);
            Eigen::VectorXd y = unscale_y_full(uy / utau);
            Eigen::VectorXd s_scaled = vy / utau;
            Eigen::VectorXd s = e.D.asDiagonal().inverse() * s_scaled / e.sigma_b;

            // residuals on the original data
            double pres = 0;
            Eigen::VectorXd Az(p.A.rows());
            Az.noalias() = p.A * x;
            for (int i = 0; i < Az.size(); ++i)
                pres = std::max(pres, std::abs(Az[i] - p.h[i]));
            // cone rows: s_cone should match z on cone coords and lie in K
            {
                int roff = e.m_eq;
                int coff = 0;
                for (const auto& blk : p.blocks) {
                    if (blk.kind != ConeBlock::Free) {
                        for (int i = 0; i < blk.dim(); ++i)
                            pres = std::max(pres, std::abs(s[roff + i] - x[coff + i]));
                        roff += blk.dim();
                    }
                    coff += blk.dim();
                }
                Eigen::VectorXd sp = s;
                project_primal_cone(e, sp);
                for (int i = e.m_eq; i < e.m; ++i)
                    pres = std::max(pres, std::abs(sp[i] - s[i]));
            }
            double prel = pres / (1.0 + hinf);

            Eigen::VectorXd Aty(n);
            {
                // c + A_ext' y with A_ext = [A0; -E_sel]
                Eigen::VectorXd y0 = y.head(e.m_eq);
                Aty = p.c + p.A.transpose() * y0;
                int roff = e.m_eq;
                int coff = 0;
                for (const auto& blk : p.blocks) {
                    if (blk.kind != ConeBlock::Free) {
                        for (int i = 0; i < blk.dim(); ++i)
                            Aty[coff + i] -= y[roff + i];
                        roff += blk.dim();
                    }
                    coff += blk.dim();
                }
            }
            double dres = inf_norm(Aty) / (1.0 + cinf);

            double pobj = p.c.dot(x);
            double dobj = -p.h.dot(y.head(e.m_eq));
            double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

            if (opts.verbose && (it + 1) % 500 == 0)
                std::fprintf(stderr,
                             "iter %6d pres %.2e dres %.2e gap %.2e obj %.6e fp %.2e tau %.2e\n",
                             it + 1, prel, dres, gap, pobj,
                             (step(S) - S).norm() / std::max(1.0, S.norm()), utau);

            if (prel <= opts.tol && dres <= opts.tol && gap <= opts.tol) {
                sol.status = SolveStatus::Optimal;
                sol.z = x;
                sol.y_full = y;
                sol.y = y.head(e.m_eq);
                sol.primal_res = prel;
                sol.dual_res = dres;
                sol.gap = gap;
                sol.iterations = it + 1;
                return sol;
            }
        } else {
            // homogeneous certificates
            Eigen::VectorXd y = unscale_y_full(uy);
            Eigen::VectorXd x = unscale_x(ux);
            double bty = p.h.dot(y.head(e.m_eq));
            double ctx = p.c.dot(x);
            // primal infeasibility: A'y ~ 0 (within K polar), h'y > 0 after
            // flipping sign convention (dual ray improves h'(-y))
            Eigen::VectorXd Aty = p.A.transpose() * y.head(e.m_eq);
            {
                int roff = e.m_eq, coff = 0;
                for (const auto& blk : p.blocks) {
                    if (blk.kind != ConeBlock::Free) {
                        for (int i = 0; i < blk.dim(); ++i) Aty[coff + i] -= y[roff + i];
                        roff += blk.dim();
                    }
                    coff += blk.dim();
                }
            }
            double ynorm = inf_norm(y);
            if (opts.verbose && (it + 1) % 500 == 0)
                std::fprintf(stderr,
                             "iter %6d homog bty %.2e Aty %.2e ctx %.2e Ax %.2e ynorm %.2e xnorm %.2e\n",
                             it + 1, bty, inf_norm(Aty), ctx, inf_norm(p.A * x),
                             ynorm, inf_norm(x));
            // The ray is trustworthy only if A'y is small relative to the
            // improvement h'y itself; a norm-relative test misfires on
            // feasible problems with large solutions.
            if (bty < -opts.infeas_tol * std::max(1.0, ynorm) * std::max(1.0, hinf) &&
                inf_norm(Aty) * std::max(1.0, hinf) <= 1e-6 * (-bty)) {
                sol.status = SolveStatus::Infeasible;
                sol.infeas_ray = -y.head(e.m_eq) / (-bty);
                sol.iterations = it + 1;
                sol.z = Eigen::VectorXd::Zero(n);
                sol.y = -y.head(e.m_eq);
                sol.y_full = -y;
                return sol;
            }
            if (ctx < -opts.infeas_tol * std::max(1.0, inf_norm(x))) {
                Eigen::VectorXd Ax = p.A * x;
                if (inf_norm(Ax) * std::max(1.0, cinf) <= 1e-6 * (-ctx)) {
                    sol.status = SolveStatus::Unbounded;
                    sol.z = x / (-ctx);
                    sol.iterations = it + 1;
                    sol.y = Eigen::VectorXd::Zero(e.m_eq);
                    return sol;
                }
            }
        }
    }
    // max iters: report best-effort candidate
    Eigen::VectorXd ux = S.segment(0, n), uy = S.segment(n, m);
    double utau = S[n + m];
    if (utau > 1e-12) {
        sol.z = unscale_x(ux / utau);
        Eigen::VectorXd y = unscale_y_full(uy / utau);
        sol.y_full = y;
        sol.y = y.head(e.m_eq);
    } else {
        sol.z = Eigen::VectorXd::Zero(n);
        sol.y = Eigen::VectorXd::Zero(e.m_eq);
    }
    sol.status = SolveStatus::MaxIters;
    sol.iterations = it;
    Residuals r = residuals(p, sol);
    // report scale-relative residuals, consistent with the optimal exit
    sol.primal_res = r.primal / (1.0 + inf_norm(p.h));
    sol.dual_res = r.dual / (1.0 + inf_norm(p.c));
    sol.gap = r.gap / (1.0 + std::abs(p.c.dot(sol.z)));
    return sol;
}

Residuals residuals(const ConicProgram& p, const ConicSolution& s) {
    p.validate();
    if (s.z.size() != p.nvars()) throw std::runtime_error("residuals: z dimension");
    Residuals r{0, 0, 0};
    Eigen::VectorXd Az = p.A * s.z;
    for (int i = 0; i < Az.size(); ++i) r.primal = std::max(r.primal, std::abs(Az[i] - p.h[i]));
    // cone distance of z
    int off = 0;
    for (const auto& blk : p.blocks) {
        if (blk.kind == ConeBlock::NonNeg) {
            for (int i = 0; i < blk.size; ++i)
                r.primal = std::max(r.primal, std::max(0.0, -s.z[off + i]));
        } else if (blk.kind == ConeBlock::Psd) {
            Eigen::MatrixXd S = smat(s.z.segment(off, blk.dim()), blk.size);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
            r.primal = std::max(r.primal, std::max(0.0, -es.eigenvalues().minCoeff()));
        }
        off += blk.dim();
    }
    // dual: c - A'(-y) ... using the stored equality dual, the reduced dual
    // slack c + A'y must lie in K^* (zero on free coords, >=0 on nonneg, psd)
    if (s.y.size() == p.A.rows()) {
        Eigen::VectorXd sd = p.c + p.A.transpose() * s.y;
        off = 0;
        for (const auto& blk : p.blocks) {
            if (blk.kind == ConeBlock::Free) {
                for (int i = 0; i < blk.dim(); ++i)
                    r.dual = std::max(r.dual, std::abs(sd[off + i]));
            } else if (blk.kind == ConeBlock::NonNeg) {
                for (int i = 0; i < blk.size; ++i)
                    r.dual = std::max(r.dual, std::max(0.0, -sd[off + i]));
            } else {
                Eigen::MatrixXd S = smat(sd.segment(off, blk.dim()), blk.size);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
                r.dual = std::max(r.dual, std::max(0.0, -es.eigenvalues().minCoeff()));
            }
            off += blk.dim();
        }
        // dual objective is -h'y in this sign convention
        r.gap = std::abs(p.c.dot(s.z) + p.h.dot(s.y));
    }
    return r;
}

}  // namespace pdebound
