#include "pdebound/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>

namespace pdebound {

namespace {

bool statelike(const std::string& n) { return n != "t" && n != "x"; }

bool is_decision_name(const std::string& n) {
    return n.size() >= 2 && n[0] == 'q' &&
           n.find_first_not_of("0123456789", 1) == std::string::npos;
}

// Degree profile of an expression over (t, x, state-like vars); drives the
// Gram basis sizes so coefficient matching always has support.
struct DegProfile {
    int t_free = 0, x_free = 0, tx_free = 0;  // over state-free terms
    int tx_state = 0;                          // max t+x among state-bearing terms
    int state = 0;                             // max state degree
};

DegProfile profile(const Polynomial& expr, const VarSet& targets) {
    DegProfile d;
    const VarSet& vs = expr.vars();
    for (const auto& [m, c] : expr.terms()) {
        (void)c;
        int td = 0, xd = 0, sd = 0;
        for (int i = 0; i < vs.size(); ++i) {
            const std::string& n = vs.name(i);
            if (!targets.contains(n)) continue;  // decision symbols
            if (n == "t")
                td = m[static_cast<size_t>(i)];
            else if (n == "x")
                xd = m[static_cast<size_t>(i)];
            else
                sd += m[static_cast<size_t>(i)];
        }
        if (sd == 0) {
            d.t_free = std::max(d.t_free, td);
            d.x_free = std::max(d.x_free, xd);
            d.tx_free = std::max(d.tx_free, td + xd);
        } else {
            d.tx_state = std::max(d.tx_state, td + xd);
            d.state = std::max(d.state, sd);
        }
    }
    return d;
}

// Two-tier Gram basis: state-free monomials within (tmax, xmax, joint) and
// state-bearing monomials of state degree <= scap with t+x degree <= stx.
std::vector<Mono> tier_basis(const VarSet& vars, int tmax, int xmax, int joint, int stx,
                             int scap) {
    std::vector<Mono> out;
    const int nv = vars.size();
    Mono m(static_cast<size_t>(nv), 0);
    std::function<void(int)> rec = [&](int i) {
        if (i == nv) {
            int td = 0, xd = 0, sd = 0;
            for (int k = 0; k < nv; ++k) {
                if (vars.name(k) == "t")
                    td = m[static_cast<size_t>(k)];
                else if (vars.name(k) == "x")
                    xd = m[static_cast<size_t>(k)];
                else
                    sd += m[static_cast<size_t>(k)];
            }
            bool ok = sd == 0 ? (td <= tmax && xd <= xmax && td + xd <= joint)
                              : (sd <= scap && td + xd <= stx);
            if (ok) out.push_back(m);
            return;
        }
        int cap = std::max({tmax, xmax, joint, stx, scap});
        for (int e = 0; e <= cap; ++e) {
            m[static_cast<size_t>(i)] = e;
            rec(i + 1);
        }
        m[static_cast<size_t>(i)] = 0;
    };
    rec(0);
    std::sort(out.begin(), out.end(), GrlexLess{});
    return out;
}

struct TierCaps {
    int tmax = 0, xmax = 0, joint = 0, stx = 0, scap = 0;
};

TierCaps caps_for(const Polynomial& expr, const VarSet& targets) {
    DegProfile d = profile(expr, targets);
    TierCaps c;
    c.scap = (d.state + 1) / 2;
    c.tmax = (d.t_free + 1) / 2;
    c.xmax = (d.x_free + 1) / 2;
    c.stx = (d.tx_state + 1) / 2;
    // state-free side must also combine with state-bearing elements to cover
    // high t+x state terms
    c.joint = std::max({c.tmax, c.xmax, (d.tx_free + 1) / 2, d.tx_state - c.stx});
    c.tmax = std::max(c.tmax, c.joint);
    c.xmax = std::max(c.xmax, c.joint);
    if (c.scap == 0) c.scap = 1;  // always allow state-linear elements
    c.stx = std::max(c.stx, 1);
    return c;
}

std::vector<Mono> tier_basis(const VarSet& vars, const TierCaps& c) {
    return tier_basis(vars, c.tmax, c.xmax, c.joint, c.stx, c.scap);
}

// Multiplier Gram basis: one (t,x)-degree lower than the main basis so that
// sigma * g stays inside the span of main-basis squares. Without this, the
// top-degree coefficient rows force multiplier diagonals to zero and the SDP
// loses strict feasibility.
std::vector<Mono> mult_basis(const VarSet& vars, const TierCaps& c) {
    TierCaps r = c;
    r.tmax = std::max(c.tmax - 1, 0);
    r.xmax = std::max(c.xmax - 1, 0);
    r.joint = std::max(c.joint - 1, 0);
    r.stx = std::max(c.stx - 1, 0);
    return tier_basis(vars, r);
}

Polynomial tpoly(const std::string& s, double T) {
    return parse_polynomial(s, VarSet({"t"}), {{"T", T}});
}

Polynomial xpoly(const std::string& s) { return parse_polynomial(s, VarSet({"x"})); }

// Sum of squared basis monomials over `vars` (the slack direction).
Polynomial basis_squares(const VarSet& vars, const std::vector<Mono>& basis) {
    Polynomial out(vars);
    for (const Mono& m : basis) {
        Mono sq(m);
        for (auto& e : sq) e *= 2;
        out.set_coeff(sq, out.coeff(sq) + 1.0);
    }
    return out;
}

double coeff_by_names(const Polynomial& p, const std::map<std::string, int>& exps) {
    const VarSet& vs = p.vars();
    Mono m(static_cast<size_t>(vs.size()), 0);
    for (const auto& [n, e] : exps) {
        if (e == 0) continue;
        int i = vs.index(n);
        if (i < 0) return 0.0;
        m[static_cast<size_t>(i)] = e;
    }
    return p.coeff(m);
}

struct Build {
    SosProgram sp;
    FullIntegralForm fi;
    VarSet b_vars;
    std::vector<Mono> b_basis;
    std::vector<int> b_ids, p_ids, g_ids;  // g_ids[k] = coeff of t^{k+k0}
    int gamma_k0 = 0;                      // lowest gamma power (0 terminal, 1 integrated)
    std::vector<int> slack_ids;  // one per slacked SOS constraint, in program order
    int l2_id = -1;              // free functional multiplier (replay only)
    int beta = 0, alpha = 0, jets1 = 0, jets2 = 0;
    double T = 0;      // internal horizon (1 after time rescaling)
    double Treal = 1;  // the problem's actual horizon
    Polynomial gamma_tpl;              // in (t, q...)
    std::vector<std::string> cons;     // constraint names in program order
};

Polynomial decision_var(const SosProgram& sp, int id) {
    (void)sp;
    VarSet vs({SosProgram::sym(id)});
    return Polynomial::variable(vs, 0);
}

Build build_program(const PdeProblem& prob, const OutputFunctional& y,
                    const BarrierSpec& spec, bool time_integrated, bool with_slack,
                    const Certificate* pin = nullptr) {
    validate(prob);
    if (prob.n != 1)
        throw Error("synthesis: only single-component problems are supported");
    Build B;
    // Work in rescaled time s = t / T, so the time variable spans [0, 1]
    // whatever the horizon: monomial bases in t are then well conditioned
    // (with T = 0.01, raw t^2 columns are 1e4 smaller than constants, which
    // stalls a first-order conic solver). The change of variables is exact:
    // v(s, x) = u(Ts, x) satisfies ds v = T F, and certificates are mapped
    // back to t units at extraction.
    B.Treal = prob.T;
    B.T = 1.0;
    Polynomial tvar = tpoly("t", 1.0);
    auto to_internal = [&](const Polynomial& q) {
        return q.vars().contains("t") ? substitute(q, {{"t", B.Treal * tvar}}) : q;
    };
    std::vector<Polynomial> Fdyn;
    for (const auto& f : prob.F) Fdyn.push_back(B.Treal * to_internal(f));
    B.alpha = prob.alpha.orders[0];
    B.beta = y.beta.orders[0];
    if (B.beta > B.alpha) throw Error("synthesis: functional jets exceed dynamics order");

    OutputFunctional inner = y;
    inner.time_integrated = false;
    B.fi = to_full_integral(inner, prob, spec.p_degree);
    if (B.fi.prob.n != 1)
        throw Error("synthesis: split (multi-component) rewrites are not supported yet");
    // The barrier's jets follow the rewritten integrand, not the original
    // functional: a boundary-point rewrite raises the jet order by one, and b
    // must see those jets. Keeping b at the original order forces the
    // integrand's boundary potential into the top-jet rows of H1, which makes
    // the unsafe condition separate boundary values that an integral of b
    // cannot separate — the joint system is then feasible only with zero
    // margin (it appears as solver stagnation). At the integrand's order the
    // unsafe set is localized by an interior comparison and the obstruction
    // disappears.
    B.beta = std::max(B.beta, B.fi.beta.orders[0]);
    const int jets1 = B.jets1 = B.beta + 1;        // unsafe-set condition
    const int jets2 = B.jets2 = B.beta + B.alpha;  // dissipation condition

    // --- decision templates -------------------------------------------------
    MultiIndex bidx{{B.beta}};
    B.b_vars = jet_varset(bidx, 1);
    {
        BasisCaps caps;
        caps.per_var = {{"t", spec.b_t_degree}, {"x", spec.b_x_degree}};
        caps.jet_total = spec.b_jet_degree;
        caps.tx_total = std::max(spec.b_t_degree, spec.b_x_degree);
        B.b_basis = monomial_basis(B.b_vars, caps.tx_total + spec.b_jet_degree, caps);
    }
    Polynomial b_tpl = B.sp.add_template("b", B.b_vars, B.b_basis);
    B.b_ids = B.sp.templates().back().ids;

    B.gamma_k0 = time_integrated ? 1 : 0;
    if (pin) {
        Polynomial g = to_internal(pin->gamma);
        if (time_integrated) g = (1.0 / B.Treal) * g;
        B.gamma_tpl = reordered(g, VarSet({"t"}));
    } else {
        int gdeg = time_integrated ? spec.gamma_degree : 0;
        std::vector<Polynomial> terms;
        for (int k = B.gamma_k0; k <= gdeg; ++k) {
            int id = B.sp.add_decision("gamma" + std::to_string(k));
            B.g_ids.push_back(id);
            Polynomial tk = tpoly("t", B.T);
            Polynomial pk = decision_var(B.sp, id);
            Polynomial term = pk;
            for (int i = 0; i < k; ++i) term = cmul(term, tk);
            terms.push_back(term);
        }
        B.gamma_tpl = csum(terms);
    }

    Polynomial gp = to_internal(B.fi.g);
    if (B.fi.p_degree >= 0) {
        std::map<std::string, Polynomial> sub;
        if (pin) {
            // When p is pinned to a supplied (typically rounded) certificate,
            // it is substituted numerically; the exact representation
            // constraints would be inconsistent with it by the rounding
            // error, so the pinned p defines the functional being replayed.
            for (int k = 0; k <= B.fi.p_degree; ++k)
                sub["p" + std::to_string(k)] = Polynomial::constant(
                    pin->has_p ? coeff_by_names(pin->p, {{"x", k}}) : 0.0);
            gp = substitute(gp, sub);
        } else {
            for (int k = 0; k <= B.fi.p_degree; ++k) {
                int id = B.sp.add_decision("p" + std::to_string(k));
                B.p_ids.push_back(id);
                sub["p" + std::to_string(k)] = decision_var(B.sp, id);
            }
            gp = substitute(gp, sub);
            for (const auto& [row, rhs] : B.fi.p_constraints) {
                std::map<int, double> eq;
                for (size_t k = 0; k < row.size(); ++k)
                    if (row[k] != 0.0) eq[B.p_ids[k]] = row[k];
                B.sp.add_equality(eq, rhs);
            }
        }
    }

    // H templates (homogenized slot vectors (1, D^k u))
    SlotLayout low1{{jets1 - 1}, true}, low2{{jets2 - 1}, true};
    SlotLayout high1{{jets1}, true}, high2{{jets2}, true};
    VarSet h1vars = time_integrated ? VarSet({"t", "x"}) : VarSet({"x"});
    VarSet h2vars({"t", "x"});
    auto h_entries = [&](const std::string& name, int side, const VarSet& hv) {
        SymMatrixPoly H(side);
        auto basis = monomial_basis(hv, spec.h_degree, {});
        for (int i = 0; i < side; ++i)
            for (int j = i; j < side; ++j)
                H.set(i, j, B.sp.add_template(name + "_" + std::to_string(i) +
                                                  std::to_string(j),
                                              hv, basis));
        return H;
    };
    SymMatrixPoly H1 = h_entries("H1", low1.dim(), h1vars);
    SymMatrixPoly H2 = h_entries("H2", low2.dim(), h2vars);

    // Constrains a decision-affine polynomial to vanish identically
    // (one linear equality per monomial of the non-decision variables).
    auto add_zero_poly = [&](const Polynomial& A) {
        const VarSet& vs = A.vars();
        std::vector<int> qid(static_cast<size_t>(vs.size()), -1);
        for (int i = 0; i < vs.size(); ++i) {
            const std::string& name = vs.name(i);
            if (name.size() >= 2 && name[0] == 'q' &&
                name.find_first_not_of("0123456789", 1) == std::string::npos)
                qid[static_cast<size_t>(i)] = std::stoi(name.substr(1));
        }
        std::map<Mono, std::pair<std::map<int, double>, double>, GrlexLess> rows;
        for (const auto& [m, c] : A.terms()) {
            Mono key = m;
            int did = -1, qdeg = 0;
            for (int i = 0; i < vs.size(); ++i)
                if (qid[static_cast<size_t>(i)] >= 0 && m[static_cast<size_t>(i)] > 0) {
                    qdeg += m[static_cast<size_t>(i)];
                    did = qid[static_cast<size_t>(i)];
                    key[static_cast<size_t>(i)] = 0;
                }
            if (qdeg > 1) throw Error("internal: condition is not affine in decisions");
            auto& row = rows[key];
            if (did >= 0)
                row.first[did] += c;
            else
                row.second += c;
        }
        for (const auto& [key, row] : rows) {
            (void)key;
            if (row.first.empty()) {
                if (std::abs(row.second) > 1e-12)
                    throw InfeasibleError("condition has an unmatchable top-jet term");
                continue;
            }
            B.sp.add_equality(row.first, -row.second);
        }
    };

    // The conditions are affine in their top jet (the raised slot vector's
    // highest derivative has no diagonal square), so positivity over all jet
    // values forces that coefficient to vanish identically; imposing this as
    // equalities keeps the remaining SDP strictly feasible.
    auto eliminate_top_jet = [&](Polynomial expr, int top_order) {
        std::string top = jet_name(0, top_order, 1);
        expr = compacted(expr);
        if (expr.vars().contains(top)) {
            if (expr.degree_in(top) > 1)
                throw Error("internal: condition is not affine in its top jet");
            add_zero_poly(compacted(differentiate(expr, top)));
            expr = compacted(substitute(expr, {{top, Polynomial::constant(0.0)}}));
        }
        return expr;
    };

    // --- SOS conditions ------------------------------------------------------
    Polynomial eps = Polynomial::constant(spec.epsilon);
    Polynomial txg = tpoly("t (T - t)", B.T);
    Polynomial xg = xpoly("x (1 - x)");

    // The functional term in the unsafe condition carries a nonnegative
    // scalar multiplier. When b is a free decision its scale absorbs the
    // multiplier, so synthesis fixes it at one; a replay pins b and gamma
    // and must leave it free (its positivity is enforced by a dedicated 1x1
    // Gram constraint added at the end).
    Polynomial l2 = Polynomial::constant(1.0);
    if (pin) {
        B.l2_id = B.sp.add_decision("l2");
        l2 = decision_var(B.sp, B.l2_id);
    }

    Polynomial gterm = time_integrated ? differentiate(B.gamma_tpl, "t") : B.gamma_tpl;
    Polynomial gpt = gp;
    if (!time_integrated && gpt.vars().contains("t"))
        gpt = substitute(gpt, {{"t", Polynomial::constant(B.T)}});
    if (!time_integrated && gterm.vars().contains("t"))
        gterm = substitute(gterm, {{"t", Polynomial::constant(B.T)}});

    // unsafe-set condition (terminal: at t = T; integrated: for all t)
    {
        Polynomial bt = time_integrated
                            ? b_tpl
                            : substitute(b_tpl, {{"t", Polynomial::constant(B.T)}});
        Polynomial b0 = substitute(substitute(b_tpl, {{"t", Polynomial::constant(0.0)}}),
                                   jet_bindings({prob.u0[0]}, {B.beta}));
        Polynomial qf1 = quadratic_form(hbar(H1, low1), high1);
        Polynomial expr = eliminate_top_jet(
            csum({bt, -b0, cmul(l2, csum({gterm, Polynomial::constant(-1.0) * gpt})),
                  qf1, -eps}),
            jets1);
        MultiIndex idx1{{jets1 - 1}};
        VarSet targets = jet_varset(idx1, 1, time_integrated, true);
        TierCaps caps = caps_for(expr, targets);
        SosProgram::Constraint c;
        c.name = "unsafe";
        c.target_vars = targets;
        c.main_basis = tier_basis(targets, caps);
        c.multipliers.push_back({reordered(xg, canonical_vars({&xg}, targets.names())),
                                 mult_basis(targets, caps)});
        if (time_integrated)
            c.multipliers.push_back(
                {reordered(txg, canonical_vars({&txg}, targets.names())),
                 mult_basis(targets, caps)});
        if (with_slack) {
            int sid = B.sp.add_decision("slack" + std::to_string(B.slack_ids.size()));
            B.slack_ids.push_back(sid);
            expr = csum({expr, cmul(decision_var(B.sp, sid),
                                    basis_squares(targets, c.main_basis))});
        }
        c.expr = compacted(expr);
        B.sp.add_sos(c);
        B.cons.push_back("unsafe");
    }

    // dissipation condition: -dB/dt pointwise
    {
        Polynomial qf2 = quadratic_form(hbar(H2, low2), high2);
        Polynomial expr = eliminate_top_jet(
            csum({-lie_derivative(b_tpl, {Fdyn[0]}, 1), qf2}), jets2);
        MultiIndex idx2{{jets2 - 1}};
        VarSet targets = jet_varset(idx2, 1, true, true);
        TierCaps caps = caps_for(expr, targets);
        SosProgram::Constraint c;
        c.name = "dissipation";
        c.target_vars = targets;
        c.main_basis = tier_basis(targets, caps);
        c.multipliers.push_back({reordered(txg, canonical_vars({&txg}, targets.names())),
                                 mult_basis(targets, caps)});
        c.multipliers.push_back({reordered(xg, canonical_vars({&xg}, targets.names())),
                                 mult_basis(targets, caps)});
        if (with_slack) {
            int sid = B.sp.add_decision("slack" + std::to_string(B.slack_ids.size()));
            B.slack_ids.push_back(sid);
            expr = csum({expr, cmul(decision_var(B.sp, sid),
                                    basis_squares(targets, c.main_basis))});
        }
        c.expr = compacted(expr);
        B.sp.add_sos(c);
        B.cons.push_back("dissipation");
    }

    // boundary conditions: integral of each quadratic-form slack must be <= 0
    auto add_boundary = [&](const std::string& name, const SymMatrixPoly& H,
                            const SlotLayout& low, bool with_t) {
        auto red = boundary_reduce(H, low, prob.Q, prob.alpha.orders, nullptr,
                                   nullptr, &Fdyn);
        if (red.trivial) return;
        Polynomial expr = -red.form;
        if (!with_t && expr.vars().contains("t"))
            expr = substitute(expr, {{"t", Polynomial::constant(B.T)}});
        expr = compacted(expr);
        // only the w coordinates that actually enter the form (plus t)
        std::vector<std::string> tnames;
        for (const auto& nm : expr.vars().names())
            if (!is_decision_name(nm)) tnames.push_back(nm);
        VarSet targets(tnames);
        TierCaps caps = caps_for(expr, targets);
        SosProgram::Constraint c;
        c.name = name;
        c.target_vars = targets;
        c.main_basis = tier_basis(targets, caps);
        if (with_t && targets.contains("t"))
            c.multipliers.push_back(
                {reordered(txg, canonical_vars({&txg}, targets.names())),
                 mult_basis(targets, caps)});
        if (with_slack) {
            int sid = B.sp.add_decision("slack" + std::to_string(B.slack_ids.size()));
            B.slack_ids.push_back(sid);
            expr = csum({expr, cmul(decision_var(B.sp, sid),
                                    basis_squares(targets, c.main_basis))});
        }
        c.expr = compacted(expr);
        B.sp.add_sos(c);
        B.cons.push_back(name);
    };
    add_boundary("boundary1", H1, low1, time_integrated);
    add_boundary("boundary2", H2, low2, true);

    // Scalar sign constraints (1x1 Grams), added last so slack_ids stay
    // index-aligned with the constraints above: the replay functional
    // multiplier must be nonnegative, and so must every slack (otherwise the
    // sum-of-slacks objective would let one loose condition subsidize the
    // violations of another).
    auto add_nonneg = [&](const std::string& name, int id) {
        SosProgram::Constraint c;
        c.name = name;
        c.target_vars = VarSet({"x"});
        c.main_basis = {Mono(static_cast<size_t>(1), 0)};
        c.expr = decision_var(B.sp, id);
        B.sp.add_sos(c);
        B.cons.push_back(name);
    };
    if (pin) add_nonneg("l2_nonneg", B.l2_id);
    for (size_t k = 0; k < B.slack_ids.size(); ++k)
        add_nonneg(B.cons[k] + "_slack_nonneg", B.slack_ids[k]);

    return B;
}

Polynomial gamma_from_solution(const Build& B, const Eigen::VectorXd& d) {
    VarSet vt({"t"});
    Polynomial g(vt);
    for (size_t k = 0; k < B.g_ids.size(); ++k)
        g.set_coeff(Mono{static_cast<int>(k) + B.gamma_k0},
                    d[static_cast<size_t>(B.g_ids[k])]);
    return g;
}

SymMatrixPoly numeric_H(const SosProgram& sp, const std::string& name, int side,
                        const Eigen::VectorXd& d) {
    SymMatrixPoly H(side);
    for (const auto& tpl : sp.templates()) {
        if (tpl.name.rfind(name + "_", 0) != 0) continue;
        std::string suffix = tpl.name.substr(name.size() + 1);
        int i = suffix[0] - '0', j = suffix[1] - '0';
        Polynomial e(tpl.vars);
        for (size_t k = 0; k < tpl.basis.size(); ++k) {
            double v = d[static_cast<size_t>(tpl.ids[k])];
            if (v != 0.0) e.set_coeff(tpl.basis[k], e.coeff(tpl.basis[k]) + v);
        }
        H.set(i, j, e);
    }
    return H;
}

Certificate extract_certificate(const Build& B, const SosSolution& sol,
                                bool time_integrated, const PdeProblem& prob,
                                const OutputFunctional& y) {
    Certificate cert;
    cert.time_integrated = time_integrated;
    const Eigen::VectorXd& d = sol.decisions;
    // everything below is built in rescaled time s = t / T; map back to t
    Polynomial tvar = tpoly("t", 1.0);
    auto to_t = [&](const Polynomial& q) {
        if (B.Treal == 1.0 || !q.vars().contains("t")) return q;
        return substitute(q, {{"t", (1.0 / B.Treal) * tvar}});
    };
    // b
    Polynomial b(B.b_vars);
    for (size_t k = 0; k < B.b_basis.size(); ++k) {
        double v = d[static_cast<size_t>(B.b_ids[k])];
        if (v != 0.0) b.set_coeff(B.b_basis[k], v);
    }
    cert.b = to_t(b);
    // p
    if (!B.p_ids.empty()) {
        cert.has_p = true;
        VarSet vx({"x"});
        Polynomial p(vx);
        for (size_t k = 0; k < B.p_ids.size(); ++k)
            p.set_coeff(Mono{static_cast<int>(k)}, d[static_cast<size_t>(B.p_ids[k])]);
        cert.p = p;
    }
    cert.gamma = to_t(gamma_from_solution(B, d));
    if (time_integrated) cert.gamma = B.Treal * cert.gamma;
    cert.bound = evaluate(cert.gamma, {{"t", B.Treal}});
    cert.H1 = numeric_H(B.sp, "H1", B.jets1 + 1, d);
    cert.H2 = numeric_H(B.sp, "H2", B.jets2 + 1, d);
    for (SymMatrixPoly* H : {&cert.H1, &cert.H2})
        for (int i = 0; i < H->side; ++i)
            for (int j = i; j < H->side; ++j) H->set(i, j, to_t(H->at(i, j)));
    // multipliers
    const auto& cons = B.sp.constraints();
    for (size_t c = 0; c < cons.size(); ++c) {
        if (c >= sol.grams.size()) break;
        for (size_t j = 0; j < cons[c].multipliers.size(); ++j) {
            Certificate::MultTerm mt;
            mt.constraint = cons[c].name;
            mt.g = to_t(cons[c].multipliers[j].g);
            mt.sigma = to_t(gram_poly(sol.grams[c].mults[j], cons[c].target_vars,
                                      cons[c].multipliers[j].basis));
            cert.multipliers.push_back(std::move(mt));
        }
        cert.solver_residual = std::max(cert.solver_residual, sol.grams[c].residual);
    }
    cert.iterations = sol.conic.iterations;
    cert.problem_hash = problem_hash(prob, y);
    return cert;
}

Certificate synthesize(const PdeProblem& prob, const OutputFunctional& y,
                       const BarrierSpec& spec, bool time_integrated) {
    Build B = build_program(prob, y, spec, time_integrated, false);
    std::map<int, double> obj;
    for (size_t k = 0; k < B.g_ids.size(); ++k)
        obj[B.g_ids[k]] = std::pow(B.T, static_cast<int>(k) + B.gamma_k0);
    B.sp.set_objective(obj);
    SosSolution sol = sos_solve(B.sp, spec.solver);
    if (sol.status == SolveStatus::Infeasible)
        throw InfeasibleError(
            "synthesis infeasible: consider raising the certificate degrees "
            "(--degree-b / --degree-gamma)");
    if (sol.status == SolveStatus::Unbounded)
        throw InfeasibleError("synthesis unbounded: the conditions do not pin the bound");
    // SOS feasibility sets rarely satisfy Slater's condition, so the dual
    // residual can stall; a primal-accurate iterate still yields a valid
    // certificate (the clipped-Gram residual and replay verification are the
    // real quality gates).
    if (sol.status == SolveStatus::MaxIters && sol.conic.primal_res > 1e-5)
        throw Error("synthesis did not converge within the iteration budget");
    return extract_certificate(B, sol, time_integrated, prob, y);
}

// Halton low-discrepancy sequence value.
double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

}  // namespace

Certificate synthesize_terminal(const PdeProblem& prob, const OutputFunctional& y,
                                const BarrierSpec& spec) {
    return synthesize(prob, y, spec, false);
}

Certificate synthesize_time_integrated(const PdeProblem& prob, const OutputFunctional& y,
                                       const BarrierSpec& spec) {
    return synthesize(prob, y, spec, true);
}

VerificationReport verify_certificate(const PdeProblem& prob, const OutputFunctional& y,
                                      const Certificate& cert, const BarrierSpec& spec,
                                      const VerifyOptions& opts) {
    VerificationReport rep;
    std::string hash = problem_hash(prob, y);
    if (!cert.problem_hash.empty() && cert.problem_hash != hash && !opts.force)
        throw HashMismatchError("certificate was generated for a different problem (hash " +
                                cert.problem_hash + " vs " + hash + ")");

    BarrierSpec vspec = spec;
    if (cert.has_p)
        vspec.p_degree = std::max(vspec.p_degree, cert.p.degree_in("x"));
    Build B = build_program(prob, y, vspec, cert.time_integrated, true, &cert);
    // pin b to the certificate (p and gamma are substituted during the build);
    // the program lives in rescaled time s = t / T, so rescale b to match
    Polynomial bs = cert.b.vars().contains("t")
                        ? substitute(cert.b, {{"t", B.Treal * tpoly("t", 1.0)}})
                        : cert.b;
    for (size_t k = 0; k < B.b_basis.size(); ++k) {
        std::map<std::string, int> exps;
        for (int i = 0; i < B.b_vars.size(); ++i)
            exps[B.b_vars.name(i)] = B.b_basis[k][static_cast<size_t>(i)];
        B.sp.fix(B.b_ids[k], coeff_by_names(bs, exps));
    }
    {
        std::map<int, double> obj;
        for (int sid : B.slack_ids) obj[sid] = 1.0;
        B.sp.set_objective(obj);
    }

    SosSolution sol = sos_solve(B.sp, spec.solver);
    if (sol.status == SolveStatus::Infeasible) {
        rep.replay_ok = false;
        rep.detail = "replay infeasible";
        return rep;
    }
    if (sol.status == SolveStatus::MaxIters && sol.conic.primal_res > 1e-5) {
        rep.detail = "replay did not converge";
        return rep;
    }
    rep.replay_slack = 0.0;
    {
        std::ostringstream ss;
        ss.precision(3);
        for (size_t k = 0; k < B.slack_ids.size(); ++k) {
            double sv = sol.decisions[static_cast<size_t>(B.slack_ids[k])];
            rep.replay_slack = std::max(rep.replay_slack, sv);
            ss << (k ? " " : "") << B.cons[k] << "=" << std::scientific << sv;
        }
        rep.detail = "replay slacks: " + ss.str();
    }
    rep.replay_ok = rep.replay_slack <= opts.slack_tol;

    if (opts.mode == VerifyMode::Replay) {
        rep.verified = rep.replay_ok;
        if (!rep.replay_ok) rep.detail = "replay slack above tolerance (" + rep.detail + ")";
        return rep;
    }

    // sample mode: evaluate each SOS expression minus its multiplier terms on
    // a Halton grid; it should be (numerically) nonnegative.
    const auto& cons = B.sp.constraints();
    double worst = 0.0;
    for (size_t c = 0; c < cons.size(); ++c) {
        Polynomial expr = substitute_decisions(cons[c].expr, sol.decisions);
        std::vector<Polynomial> sigg;
        for (size_t j = 0; j < cons[c].multipliers.size(); ++j)
            sigg.push_back(cmul(gram_poly(sol.grams[c].mults[j], cons[c].target_vars,
                                          cons[c].multipliers[j].basis),
                                cons[c].multipliers[j].g));
        const double slack =
            c < B.slack_ids.size()
                ? sol.decisions[static_cast<size_t>(B.slack_ids[c])]
                : 0.0;
        Polynomial slackless =
            csum({expr, -slack * basis_squares(cons[c].target_vars, cons[c].main_basis)});
        const VarSet& tv = cons[c].target_vars;
        for (int s = 0; s < opts.samples; ++s) {
            std::map<std::string, double> pt;
            int dim = 0;
            static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
            for (int i = 0; i < tv.size(); ++i) {
                double hv = halton(s + 1 + static_cast<int>(opts.seed), primes[dim % 12]);
                ++dim;
                const std::string& n = tv.name(i);
                if (n == "t")
                    pt[n] = hv;  // constraints live in rescaled time s = t/T
                else if (n == "x")
                    pt[n] = hv;
                else
                    pt[n] = (2 * hv - 1) * opts.jet_box;
            }
            double v = evaluate(slackless, pt);
            for (const auto& sg : sigg) v -= evaluate(sg, pt);
            worst = std::min(worst, v);
        }
    }
    rep.worst_violation = worst;
    // scale-aware tolerance: Gram residuals act on monomials up to the jet box
    double scale = std::pow(std::max(1.0, opts.jet_box), 4);
    rep.sample_ok = worst >= -(opts.sample_tol * scale + std::abs(rep.replay_slack) * scale);
    rep.verified = opts.mode == VerifyMode::Sample ? rep.sample_ok
                                                   : (rep.replay_ok && rep.sample_ok);
    rep.detail = rep.verified ? "verified" : "verification failed";
    return rep;
}

std::string problem_hash(const PdeProblem& prob, const OutputFunctional& y) {
    std::ostringstream os;
    os.precision(17);
    os << prob.n << "|" << prob.T << "|";
    for (int a : prob.alpha.orders) os << a << ",";
    for (const auto& f : prob.F) os << f.to_string() << ";";
    for (const auto& u : prob.u0) os << u.to_string() << ";";
    os << prob.Q.rows() << "x" << prob.Q.cols() << ":";
    for (int r = 0; r < prob.Q.rows(); ++r)
        for (int c = 0; c < prob.Q.cols(); ++c) os << prob.Q(r, c) << ",";
    os << "|" << static_cast<int>(y.kind) << "," << y.side << "," << y.x0 << "," << y.x1
       << "," << y.x2 << "," << y.time_integrated << "," << y.g.to_string() << "|";
    for (int a : y.beta.orders) os << a << ",";
    std::string s = os.str();
    uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream hx;
    hx << std::hex << h;
    return hx.str();
}

}  // namespace pdebound
