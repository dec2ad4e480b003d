#include "pdebound/transform.hpp"

#include <algorithm>
#include <cmath>

namespace pdebound {

namespace {

// Substitution that restricts a polynomial in (t, x, old jets) to one piece
// of a split domain: x -> off + s*x, jet (c, j) -> s^{-j} * jet (base + c, j)
// in the new naming with new_nc components.
Polynomial restrict_to_piece(const Polynomial& p, const MultiIndex& alpha, int old_nc,
                             int new_nc, int base, double off, double s) {
    std::map<std::string, Polynomial> sub;
    if (p.vars().contains("x")) {
        VarSet vx({"x"});
        sub["x"] = Polynomial::constant(off) + s * Polynomial::variable(vx, "x");
    }
    for (int c = 0; c < old_nc; ++c) {
        // F may carry jets up to alpha_c + 1 (after prolongation); cover a
        // margin of extra orders so any jet actually present is remapped.
        int maxo = alpha.orders[static_cast<size_t>(c)] + 2;
        for (int j = 0; j <= maxo; ++j) {
            std::string oldn = jet_name(c, j, old_nc);
            if (!p.vars().contains(oldn)) continue;
            std::string newn = jet_name(base + c, j, new_nc);
            VarSet vs({newn});
            sub[oldn] = std::pow(s, -j) * Polynomial::variable(vs, newn);
        }
    }
    return compacted(substitute(p, sub));
}

int block_cols(const MultiIndex& alpha) {
    int s = 0;
    for (int a : alpha.orders) s += a;
    return s;
}

PdeProblem split_pieces(const PdeProblem& prob, std::vector<double> cuts) {
    for (double c : cuts)
        if (!(c > 0.0 && c < 1.0)) throw Error("split: cut point outside (0,1)");
    std::sort(cuts.begin(), cuts.end());
    for (size_t i = 1; i < cuts.size(); ++i)
        if (!(cuts[i] > cuts[i - 1])) throw Error("split: cut points must be distinct");

    std::vector<double> bp;
    bp.push_back(0.0);
    bp.insert(bp.end(), cuts.begin(), cuts.end());
    bp.push_back(1.0);
    const int np = static_cast<int>(bp.size()) - 1;
    const int n = prob.n, nn = np * n;

    PdeProblem out;
    out.n = nn;
    out.T = prob.T;
    out.params = prob.params;
    out.alpha.orders.resize(static_cast<size_t>(nn));
    out.F.resize(static_cast<size_t>(nn));
    out.u0.resize(static_cast<size_t>(nn));
    out.comap.resize(static_cast<size_t>(nn));
    for (int k = 0; k < np; ++k) {
        double off = bp[static_cast<size_t>(k)];
        double s = bp[static_cast<size_t>(k) + 1] - off;
        for (int c = 0; c < n; ++c) {
            int nc = k * n + c;
            out.alpha.orders[static_cast<size_t>(nc)] = prob.alpha.orders[static_cast<size_t>(c)];
            out.F[static_cast<size_t>(nc)] = restrict_to_piece(
                prob.F[static_cast<size_t>(c)], prob.alpha, n, nn, k * n, off, s);
            out.u0[static_cast<size_t>(nc)] =
                substitute(prob.u0[static_cast<size_t>(c)],
                           {{"x", Polynomial::constant(off) +
                                      s * Polynomial::variable(VarSet({"x"}), "x")}});
            PdeProblem::ComponentMap base =
                prob.comap.empty() ? PdeProblem::ComponentMap{}
                                   : prob.comap[static_cast<size_t>(c)];
            out.comap[static_cast<size_t>(nc)] = {base.offset + base.scale * off,
                                                  base.scale * s,
                                                  prob.comap.empty() ? c : base.parent};
        }
    }

    // Q on the stacked new boundary jets: the original rows act on the
    // physical ends (x=1 -> last piece at its x=1, x=0 -> first piece at its
    // x=0) with per-order jet rescaling; one interface row per (cut, comp,
    // order) matches the physical derivatives across the cut.
    const int oq = block_cols(prob.alpha), nq = block_cols(out.alpha);
    auto ncol = [&](int endblock, int comp, int j) {
        int off = endblock * nq;
        for (int c = 0; c < comp; ++c) off += out.alpha.orders[static_cast<size_t>(c)];
        return off + j;
    };
    int nifrows = (np - 1) * oq;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(prob.Q.rows() + nifrows, 2 * nq);
    double s_first = bp[1] - bp[0], s_last = bp[static_cast<size_t>(np)] - bp[static_cast<size_t>(np) - 1];
    for (int r = 0; r < prob.Q.rows(); ++r) {
        int col = 0;
        for (int e = 0; e < 2; ++e)  // e=0: x=1 block, e=1: x=0 block
            for (int c = 0; c < n; ++c)
                for (int j = 0; j < prob.alpha.orders[static_cast<size_t>(c)]; ++j, ++col) {
                    double v = prob.Q(r, col);
                    if (v == 0.0) continue;
                    if (e == 0)  // physical x=1: last piece
                        Q(r, ncol(0, (np - 1) * n + c, j)) = v * std::pow(s_last, -j);
                    else  // physical x=0: first piece
                        Q(r, ncol(1, c, j)) = v * std::pow(s_first, -j);
                }
    }
    int row = static_cast<int>(prob.Q.rows());
    for (int k = 0; k + 1 < np; ++k) {
        double sl = bp[static_cast<size_t>(k) + 1] - bp[static_cast<size_t>(k)];
        double sr = bp[static_cast<size_t>(k) + 2] - bp[static_cast<size_t>(k) + 1];
        for (int c = 0; c < n; ++c)
            for (int j = 0; j < prob.alpha.orders[static_cast<size_t>(c)]; ++j, ++row) {
                Q(row, ncol(0, k * n + c, j)) = std::pow(sl, -j);
                Q(row, ncol(1, (k + 1) * n + c, j)) = -std::pow(sr, -j);
            }
    }
    out.Q = Q;
    return out;
}

Polynomial p_template_poly(int degree) {
    std::vector<std::string> names = {"x"};
    for (int k = 0; k <= degree; ++k) names.push_back("p" + std::to_string(k));
    VarSet vs(names);
    Polynomial p(vs);
    for (int k = 0; k <= degree; ++k) {
        Mono m(static_cast<size_t>(vs.size()), 0);
        m[0] = k;
        m[(size_t)vs.index("p" + std::to_string(k))] = 1;
        p.set_coeff(m, 1.0);
    }
    return p;
}

std::vector<double> p_row_at(int degree, double x) {
    std::vector<double> row(static_cast<size_t>(degree) + 1);
    for (int k = 0; k <= degree; ++k) row[static_cast<size_t>(k)] = std::pow(x, k);
    return row;
}

}  // namespace

void validate(const PdeProblem& prob, double tol) {
    if (prob.n <= 0) throw Error("problem: no components");
    if (prob.alpha.ncomp() != prob.n || static_cast<int>(prob.F.size()) != prob.n ||
        static_cast<int>(prob.u0.size()) != prob.n)
        throw Error("problem: component count mismatch between alpha/F/u0");
    if (!prob.comap.empty() && static_cast<int>(prob.comap.size()) != prob.n)
        throw Error("problem: component map size mismatch");
    if (!(prob.T > 0.0)) throw Error("problem: horizon T must be positive");
    int nq = prob.boundary_jets();
    if (prob.Q.cols() != 2 * nq)
        throw Error("problem: Q must have 2 * (total boundary jets) columns");
    if (prob.Q.rows() > prob.Q.cols())
        throw Error("problem: Q has more rows than boundary jets");
    for (const auto& f : prob.F)
        for (const auto& name : f.vars().names()) {
            if (name == "t" || name == "x") continue;
            auto jv = parse_jet_name(name);
            if (!jv) throw Error("problem: dynamics use unknown symbol '" + name + "'");
            if (jv->component >= prob.n ||
                jv->order > prob.alpha.orders[static_cast<size_t>(jv->component)])
                throw Error("problem: dynamics jet '" + name + "' exceeds alpha");
        }
    // u0 must satisfy the boundary conditions at t = 0.
    Eigen::VectorXd v(2 * nq);
    int col = 0;
    for (double at : {1.0, 0.0})
        for (int c = 0; c < prob.n; ++c) {
            Polynomial d = prob.u0[static_cast<size_t>(c)];
            for (int j = 0; j < prob.alpha.orders[static_cast<size_t>(c)]; ++j, ++col) {
                v[col] = evaluate(d, {{"x", at}});
                d = d.vars().contains("x") ? differentiate(d, "x") : Polynomial(d.vars());
            }
        }
    if (nq > 0 && prob.Q.rows() > 0) {
        double res = (prob.Q * v).cwiseAbs().maxCoeff();
        if (res > tol)
            throw Error("problem: initial condition violates boundary conditions (residual " +
                        std::to_string(res) + ")");
    }
}

PdeProblem split_at_point(const PdeProblem& prob, double x0) {
    return split_pieces(prob, {x0});
}

PdeProblem split_subdomain(const PdeProblem& prob, double x1, double x2) {
    if (!(x1 < x2)) throw Error("split: need x1 < x2");
    return split_pieces(prob, {x1, x2});
}

FullIntegralForm to_full_integral(const OutputFunctional& y, const PdeProblem& prob,
                                  int p_degree) {
    if (p_degree < 1) throw Error("to_full_integral: p degree must be >= 1");
    FullIntegralForm out;
    switch (y.kind) {
        case OutputFunctional::Kind::FullIntegral: {
            out.prob = prob;
            out.g = y.g;
            out.beta = y.beta;
            return out;
        }
        case OutputFunctional::Kind::BoundaryPoint: {
            if (y.side != 0 && y.side != 1) throw Error("to_full_integral: side must be 0 or 1");
            out.prob = prob;
            Polynomial gfix =
                y.g.vars().contains("x")
                    ? substitute(y.g, {{"x", Polynomial::constant(double(y.side))}})
                    : y.g;
            Polynomial p = p_template_poly(p_degree);
            out.g = compacted(total_x(cmul(p, gfix)));
            out.beta = y.beta.raised(1);
            out.p_degree = p_degree;
            if (y.side == 0) {
                // integral of d/dx [p g] = p(1) g(1) - p(0) g(0); pin p(1)=0,
                // p(0)=-1 so the integral equals g at x=0.
                out.p_constraints.push_back({p_row_at(p_degree, 1.0), 0.0});
                out.p_constraints.push_back({p_row_at(p_degree, 0.0), -1.0});
            } else {
                out.p_constraints.push_back({p_row_at(p_degree, 0.0), 0.0});
                out.p_constraints.push_back({p_row_at(p_degree, 1.0), 1.0});
            }
            return out;
        }
        case OutputFunctional::Kind::InteriorPoint: {
            if (!(y.x0 > 0.0 && y.x0 < 1.0))
                throw Error("to_full_integral: interior point outside (0,1)");
            out.prob = split_at_point(prob, y.x0);
            // g at the physical point x0 = left-piece values at its x = 1,
            // with per-order jet rescaling; then the boundary trick at side 1.
            Polynomial g1 = restrict_to_piece(y.g, y.beta, prob.n, out.prob.n, 0, 0.0, y.x0);
            // restrict_to_piece substituted x -> x0 * x; fixing the piece
            // coordinate at 1 lands on the physical point x0.
            if (g1.vars().contains("x"))
                g1 = substitute(g1, {{"x", Polynomial::constant(1.0)}});
            Polynomial p = p_template_poly(p_degree);
            out.g = compacted(total_x(cmul(p, g1)));
            out.beta.orders.assign(static_cast<size_t>(out.prob.n), 0);
            for (int c = 0; c < prob.n; ++c)
                out.beta.orders[static_cast<size_t>(c)] =
                    y.beta.orders[static_cast<size_t>(c)] + 1;
            out.p_degree = p_degree;
            out.p_constraints.push_back({p_row_at(p_degree, 0.0), 0.0});
            out.p_constraints.push_back({p_row_at(p_degree, 1.0), 1.0});
            return out;
        }
        case OutputFunctional::Kind::SubdomainIntegral: {
            if (!(y.x1 > 0.0 && y.x1 < y.x2 && y.x2 < 1.0))
                throw Error("to_full_integral: subdomain outside (0,1)");
            out.prob = split_subdomain(prob, y.x1, y.x2);
            double w = y.x2 - y.x1;
            // middle piece components are n..2n-1
            out.g = compacted(
                w * restrict_to_piece(y.g, y.beta, prob.n, out.prob.n, prob.n, y.x1, w));
            out.beta.orders.assign(static_cast<size_t>(out.prob.n), 0);
            for (int c = 0; c < prob.n; ++c)
                out.beta.orders[static_cast<size_t>(prob.n + c)] =
                    y.beta.orders[static_cast<size_t>(c)];
            return out;
        }
    }
    throw Error("to_full_integral: unknown kind");
}

std::map<std::string, Polynomial> jet_bindings(const std::vector<Polynomial>& fields,
                                               const std::vector<int>& max_order) {
    if (fields.size() != max_order.size())
        throw Error("jet_bindings: fields/orders size mismatch");
    std::map<std::string, Polynomial> sub;
    int nc = static_cast<int>(fields.size());
    for (int c = 0; c < nc; ++c) {
        Polynomial d = fields[static_cast<size_t>(c)];
        for (int j = 0; j <= max_order[static_cast<size_t>(c)]; ++j) {
            sub[jet_name(c, j, nc)] = d;
            d = d.vars().contains("x") ? differentiate(d, "x") : Polynomial(d.vars());
        }
    }
    return sub;
}

Polynomial integral_on_fields(const Polynomial& g, const std::vector<Polynomial>& fields,
                              const std::vector<int>& max_order) {
    Polynomial s = substitute(g, jet_bindings(fields, max_order));
    return compacted(integrate(s, "x", 0.0, 1.0));
}

}  // namespace pdebound
