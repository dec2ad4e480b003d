#include "pdebound/calculus.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace pdebound {

namespace {

int tri_index(int i, int j, int side) {
    if (i > j) std::swap(i, j);
    // row-major upper triangle: row i holds side-i entries starting at col i
    return i * side - i * (i - 1) / 2 + (j - i);
}

}  // namespace

const Polynomial& SymMatrixPoly::at(int i, int j) const {
    return ent[static_cast<size_t>(tri_index(i, j, side))];
}

void SymMatrixPoly::set(int i, int j, Polynomial p) {
    ent[static_cast<size_t>(tri_index(i, j, side))] = std::move(p);
}

SymMatrixPoly SymMatrixPoly::map(const std::map<std::string, Polynomial>& bindings) const {
    SymMatrixPoly out(side);
    for (size_t k = 0; k < ent.size(); ++k) out.ent[k] = substitute(ent[k], bindings);
    return out;
}

Eigen::MatrixXd SymMatrixPoly::evaluate_at(const std::map<std::string, double>& point) const {
    Eigen::MatrixXd M(side, side);
    for (int i = 0; i < side; ++i)
        for (int j = i; j < side; ++j) {
            double v = evaluate(at(i, j), point);
            M(i, j) = v;
            M(j, i) = v;
        }
    return M;
}

int SlotLayout::dim() const {
    int n = homogenize ? 1 : 0;
    for (int o : orders) n += o + 1;
    return n;
}

std::vector<std::string> SlotLayout::slot_names() const {
    std::vector<std::string> out;
    if (homogenize) out.push_back("1");
    for (int c = 0; c < ncomp(); ++c)
        for (int j = 0; j <= orders[static_cast<size_t>(c)]; ++j)
            out.push_back(jet_name(c, j, ncomp()));
    return out;
}

std::vector<Polynomial> SlotLayout::slots() const {
    std::vector<std::string> names;
    for (int c = 0; c < ncomp(); ++c)
        for (int j = 0; j <= orders[static_cast<size_t>(c)]; ++j)
            names.push_back(jet_name(c, j, ncomp()));
    VarSet vs(names);
    std::vector<Polynomial> out;
    if (homogenize) out.push_back(Polynomial::constant(1.0).aligned_to(vs));
    for (const auto& n : names) out.push_back(Polynomial::variable(vs, n));
    return out;
}

SymMatrixPoly hbar(const SymMatrixPoly& H, const SlotLayout& low) {
    if (H.side != low.dim()) throw Error("hbar: H side does not match slot layout");
    SlotLayout high = low;
    for (int& o : high.orders) ++o;
    const int nl = low.dim(), nh = high.dim();
    const int cslot = low.homogenize ? 1 : 0;

    // Low slot i maps to high slot sel[i]; its x-derivative maps to der[i]
    // (-1 for the constant slot, whose derivative vanishes).
    std::vector<int> sel(static_cast<size_t>(nl)), der(static_cast<size_t>(nl), -1);
    {
        int li = 0, hi = 0;
        if (low.homogenize) {
            sel[0] = 0;
            li = hi = 1;
        }
        for (int c = 0; c < low.ncomp(); ++c) {
            int lo = low.orders[static_cast<size_t>(c)];
            for (int j = 0; j <= lo; ++j) {
                sel[static_cast<size_t>(li + j)] = hi + j;
                der[static_cast<size_t>(li + j)] = hi + j + 1;
            }
            li += lo + 1;
            hi += lo + 2;
        }
        (void)cslot;
    }

    // Accumulate the (generally unsymmetric) coefficient matrix A with
    // z'Az = v'(dH/dx)v + 2 v'H(dv/dx), then symmetrize.
    std::vector<std::vector<Polynomial>> A(static_cast<size_t>(nh),
                                           std::vector<Polynomial>(static_cast<size_t>(nh)));
    for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) {
            Polynomial hij = H.at(i, j);
            Polynomial dh = hij.vars().contains("x") ? differentiate(hij, "x")
                                                     : Polynomial(hij.vars());
            auto& tgt = A[static_cast<size_t>(sel[i])][static_cast<size_t>(sel[j])];
            tgt = csum({tgt, dh});
            if (der[j] >= 0) {
                auto& t2 = A[static_cast<size_t>(sel[i])][static_cast<size_t>(der[j])];
                t2 = csum({t2, 2.0 * hij});
            }
        }
    SymMatrixPoly out(nh);
    for (int i = 0; i < nh; ++i)
        for (int j = i; j < nh; ++j)
            out.set(i, j, 0.5 * csum({A[static_cast<size_t>(i)][static_cast<size_t>(j)],
                                      A[static_cast<size_t>(j)][static_cast<size_t>(i)]}));
    return out;
}

Polynomial quadratic_form(const SymMatrixPoly& M, const SlotLayout& lay) {
    if (M.side != lay.dim()) throw Error("quadratic_form: side mismatch");
    std::vector<Polynomial> s = lay.slots();
    std::vector<Polynomial> terms;
    for (int i = 0; i < M.side; ++i)
        for (int j = i; j < M.side; ++j) {
            const Polynomial& m = M.at(i, j);
            if (m.is_zero()) continue;
            double mult = i == j ? 1.0 : 2.0;
            terms.push_back(mult * cmul(m, cmul(s[static_cast<size_t>(i)],
                                                s[static_cast<size_t>(j)])));
        }
    return csum(terms);
}

namespace {

// Jet substitution map for concrete fields u_c(t,x), up to `order` per comp.
std::map<std::string, Polynomial> field_jets(const std::vector<Polynomial>& fields,
                                             const std::vector<int>& orders) {
    std::map<std::string, Polynomial> sub;
    int nc = static_cast<int>(fields.size());
    for (int c = 0; c < nc; ++c) {
        Polynomial d = fields[static_cast<size_t>(c)];
        for (int j = 0; j <= orders[static_cast<size_t>(c)]; ++j) {
            sub[jet_name(c, j, nc)] = d;
            d = d.vars().contains("x") ? differentiate(d, "x") : Polynomial(d.vars());
        }
    }
    return sub;
}

}  // namespace

Polynomial boundary_form(const SymMatrixPoly& H, const SlotLayout& lay,
                         const std::vector<Polynomial>& fields, double at) {
    Polynomial qf = Polynomial();
    std::vector<Polynomial> terms;
    auto sub = field_jets(fields, lay.orders);
    std::vector<std::string> names = lay.slot_names();
    std::vector<Polynomial> vals;
    for (const auto& n : names) {
        if (n == "1")
            vals.push_back(Polynomial::constant(1.0));
        else
            vals.push_back(substitute(sub.at(n), {{"x", Polynomial::constant(at)}}));
    }
    for (int i = 0; i < H.side; ++i)
        for (int j = i; j < H.side; ++j) {
            Polynomial h = substitute(H.at(i, j), {{"x", Polynomial::constant(at)}});
            if (h.is_zero()) continue;
            double mult = i == j ? 1.0 : 2.0;
            terms.push_back(mult * cmul(h, cmul(vals[static_cast<size_t>(i)],
                                                vals[static_cast<size_t>(j)])));
        }
    (void)qf;
    return csum(terms);
}

double ftc_residual(const SymMatrixPoly& H, const SlotLayout& low,
                    const std::vector<Polynomial>& fields) {
    SlotLayout high = low;
    for (int& o : high.orders) ++o;
    Polynomial qf = quadratic_form(hbar(H, low), high);
    auto sub = field_jets(fields, high.orders);
    Polynomial integrand = substitute(qf, sub);
    Polynomial lhs = integrate(integrand, "x", 0.0, 1.0);
    Polynomial rhs = csum({boundary_form(H, low, fields, 1.0),
                           -boundary_form(H, low, fields, 0.0)});
    return max_abs_coeff(csum({lhs, -rhs}));
}

BoundaryReduction boundary_reduce(const SymMatrixPoly& H, const SlotLayout& lay,
                                  const Eigen::MatrixXd& Q,
                                  const std::vector<int>& qa_orders,
                                  const SymMatrixPoly* F0, const SymMatrixPoly* F1,
                                  const std::vector<Polynomial>* Fdyn) {
    const int nc = lay.ncomp();
    if (static_cast<int>(qa_orders.size()) != nc)
        throw Error("boundary_reduce: component count mismatch");
    int nq = 0;  // jets per end that Q constrains
    for (int o : qa_orders) nq += o;
    if (Q.cols() != 2 * nq) throw Error("boundary_reduce: Q column count mismatch");

    // Per-component jet count of the ambient space: large enough for both
    // H's layout and the jets Q constrains. The null space is computed in
    // the ambient space and its rows restricted to H's layout afterwards.
    std::vector<int> fjet(static_cast<size_t>(nc));
    int nfull = 0;
    for (int c = 0; c < nc; ++c) {
        fjet[static_cast<size_t>(c)] = std::max(lay.orders[static_cast<size_t>(c)] + 1,
                                                qa_orders[static_cast<size_t>(c)]);
        nfull += fjet[static_cast<size_t>(c)];
    }

    // Column map from Q's (end, comp, order) layout into the stacked v.
    Eigen::MatrixXd Qext = Eigen::MatrixXd::Zero(Q.rows(), 2 * nfull);
    for (int end = 0; end < 2; ++end) {  // 0: x=1 block, 1: x=0 block
        int qoff = end * nq, voff = end * nfull;
        int qc = 0, vc = 0;
        for (int c = 0; c < nc; ++c) {
            for (int j = 0; j < qa_orders[static_cast<size_t>(c)]; ++j)
                Qext.col(voff + vc + j) = Q.col(qoff + qc + j);
            qc += qa_orders[static_cast<size_t>(c)];
            vc += fjet[static_cast<size_t>(c)];
        }
    }

    if (Fdyn) {
        if (static_cast<int>(Fdyn->size()) != nc)
            throw Error("boundary_reduce: dynamics component count mismatch");
        // d/dt of a constrained row: each jet dx^j u_c becomes total_x^j F_c
        // evaluated at the end. Keep the derived row only if it is a linear
        // homogeneous constant-coefficient combination of jets inside the
        // ambient space.
        std::vector<int> slot_off(static_cast<size_t>(nc), 0);
        for (int c = 1; c < nc; ++c)
            slot_off[static_cast<size_t>(c)] =
                slot_off[static_cast<size_t>(c - 1)] + fjet[static_cast<size_t>(c - 1)];
        auto derive_row = [&](const Eigen::VectorXd& row,
                              Eigen::VectorXd& out) -> bool {
            out = Eigen::VectorXd::Zero(2 * nfull);
            for (int end = 0; end < 2; ++end) {
                int voff = end * nfull;
                double atx = end == 0 ? 1.0 : 0.0;
                std::vector<Polynomial> terms;
                for (int c = 0; c < nc; ++c)
                    for (int j = 0; j < fjet[static_cast<size_t>(c)]; ++j) {
                        double q = row[voff + slot_off[static_cast<size_t>(c)] + j];
                        if (q == 0.0) continue;
                        terms.push_back(q * total_x_n((*Fdyn)[static_cast<size_t>(c)], j));
                    }
                if (terms.empty()) continue;
                Polynomial d = compacted(
                    substitute(csum(terms), {{"x", Polynomial::constant(atx)}}));
                if (d.vars().contains("t") || d.vars().contains("x")) return false;
                for (const auto& [m, cf] : d.terms()) {
                    int tot = 0, slot = -1;
                    for (size_t i = 0; i < m.size(); ++i) {
                        if (m[i] == 0) continue;
                        tot += m[i];
                        auto jv = parse_jet_name(d.vars().name(static_cast<int>(i)));
                        if (!jv || jv->component >= nc ||
                            jv->order >= fjet[static_cast<size_t>(jv->component)])
                            return false;
                        slot = slot_off[static_cast<size_t>(jv->component)] + jv->order;
                    }
                    if (tot != 1) return false;  // nonlinear or inhomogeneous
                    out[voff + slot] += cf;
                }
            }
            return out.norm() > 1e-14;
        };
        Eigen::MatrixXd rows = Qext;
        for (int round = 0; round < 4 && rows.rows() > 0; ++round) {
            std::vector<Eigen::VectorXd> fresh;
            for (int r = 0; r < rows.rows(); ++r) {
                Eigen::VectorXd d;
                if (derive_row(rows.row(r).transpose(), d)) fresh.push_back(d);
            }
            if (fresh.empty()) break;
            rows.resize(static_cast<int>(fresh.size()), 2 * nfull);
            Eigen::MatrixXd grown(Qext.rows() + rows.rows(), 2 * nfull);
            for (size_t k = 0; k < fresh.size(); ++k) rows.row(static_cast<int>(k)) = fresh[k];
            grown << Qext, rows;
            Qext = grown;
        }
    }

    BoundaryReduction red;
    Eigen::MatrixXd N;
    if (Qext.rows() == 0) {
        N = Eigen::MatrixXd::Identity(2 * nfull, 2 * nfull);
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Qext, Eigen::ComputeFullV);
        double tol = 1e-12 * std::max(Qext.rows(), Qext.cols()) *
                     (svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
        int rank = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > tol) ++rank;
        N = svd.matrixV().rightCols(2 * nfull - rank);
    }
    red.nfree = static_cast<int>(N.cols());
    red.basis = N;

    // w variable names
    std::vector<std::string> wnames;
    for (int k = 0; k < red.nfree; ++k) wnames.push_back("w" + std::to_string(k + 1));
    std::vector<std::string> base = {"t"};
    base.insert(base.end(), wnames.begin(), wnames.end());
    VarSet wvs(base);

    // slot values per end: constant slot -> 1, jet slot -> row of N dotted w
    auto slot_vals = [&](double at) {
        int voff = at == 1.0 ? 0 : nfull;
        std::vector<Polynomial> vals;
        if (lay.homogenize) vals.push_back(Polynomial::constant(1.0).aligned_to(wvs));
        int coff = 0;
        for (int c = 0; c < nc; ++c) {
            for (int i = 0; i <= lay.orders[static_cast<size_t>(c)]; ++i) {
                Polynomial v(wvs);
                for (int k = 0; k < red.nfree; ++k) {
                    double coef = N(voff + coff + i, k);
                    if (std::abs(coef) > 1e-14)
                        v = v + coef * Polynomial::variable(wvs, wnames[static_cast<size_t>(k)]);
                }
                vals.push_back(v);
            }
            coff += fjet[static_cast<size_t>(c)];
        }
        return vals;
    };
    red.slots1 = slot_vals(1.0);
    red.slots0 = slot_vals(0.0);
    auto end_form = [&](double at, const SymMatrixPoly* F) {
        const std::vector<Polynomial>& vals = at == 1.0 ? red.slots1 : red.slots0;
        std::vector<Polynomial> terms;
        for (int i = 0; i < H.side; ++i)
            for (int j = i; j < H.side; ++j) {
                Polynomial h = substitute(H.at(i, j), {{"x", Polynomial::constant(at)}});
                if (F) h = csum({h, F->at(i, j)});
                if (h.is_zero()) continue;
                double mult = i == j ? 1.0 : 2.0;
                terms.push_back(mult * cmul(h, cmul(vals[static_cast<size_t>(i)],
                                                    vals[static_cast<size_t>(j)])));
            }
        return csum(terms);
    };
    red.form = csum({end_form(1.0, F1), -end_form(0.0, F0)});
    red.trivial = red.form.is_zero();
    return red;
}

Polynomial lie_derivative(const Polynomial& b, const std::vector<Polynomial>& F,
                          int ncomp) {
    if (static_cast<int>(F.size()) != ncomp)
        throw Error("lie_derivative: dynamics count != components");
    std::vector<Polynomial> terms;
    if (b.vars().contains("t")) terms.push_back(differentiate(b, "t"));
    for (int i = 0; i < b.vars().size(); ++i) {
        auto jv = parse_jet_name(b.vars().name(i));
        if (!jv) continue;
        if (jv->component >= ncomp)
            throw Error("lie_derivative: jet component out of range");
        Polynomial db = differentiate(b, b.vars().name(i));
        if (db.is_zero()) continue;
        terms.push_back(cmul(db, total_x_n(F[static_cast<size_t>(jv->component)], jv->order)));
    }
    if (terms.empty()) return Polynomial(b.vars());
    return csum(terms);
}

}  // namespace pdebound
