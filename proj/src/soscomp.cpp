#include "pdebound/soscomp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>

namespace pdebound {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

std::optional<int> decision_id(const std::string& name) {
    if (name.size() < 2 || name[0] != 'q') return std::nullopt;
    for (size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) return std::nullopt;
    return std::atoi(name.c_str() + 1);
}

bool is_jet(const std::string& name) { return parse_jet_name(name).has_value(); }

void enumerate(const VarSet& vars, int idx, int remaining, const BasisCaps& caps,
               int jet_left, int tx_left, Mono& cur, std::vector<Mono>& out) {
    if (idx == vars.size()) {
        out.push_back(cur);
        return;
    }
    const std::string& n = vars.name(idx);
    int cap = remaining;
    auto it = caps.per_var.find(n);
    if (it != caps.per_var.end()) cap = std::min(cap, it->second);
    bool jet = is_jet(n);
    bool tx = n == "t" || n == "x";
    if (jet && jet_left >= 0) cap = std::min(cap, jet_left);
    if (tx && tx_left >= 0) cap = std::min(cap, tx_left);
    for (int e = 0; e <= cap; ++e) {
        cur[static_cast<size_t>(idx)] = e;
        enumerate(vars, idx + 1, remaining - e, caps, jet ? (jet_left < 0 ? -1 : jet_left - e) : jet_left,
                  tx ? (tx_left < 0 ? -1 : tx_left - e) : tx_left, cur, out);
    }
    cur[static_cast<size_t>(idx)] = 0;
}

}  // namespace

std::vector<Mono> monomial_basis(const VarSet& vars, int max_degree,
                                 const BasisCaps& caps) {
    if (max_degree < 0) throw Error("monomial_basis: negative degree");
    std::vector<Mono> out;
    Mono cur(static_cast<size_t>(vars.size()), 0);
    enumerate(vars, 0, max_degree, caps, caps.jet_total, caps.tx_total, cur, out);
    std::sort(out.begin(), out.end(), GrlexLess{});
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int SosProgram::add_decision(const std::string& label) {
    labels_.push_back(label);
    return static_cast<int>(labels_.size()) - 1;
}

Polynomial SosProgram::add_template(const std::string& name, const VarSet& vars,
                                    const std::vector<Mono>& basis) {
    TemplateInfo info{name, vars, basis, {}};
    std::vector<std::string> names = vars.names();
    for (size_t k = 0; k < basis.size(); ++k) {
        int id = add_decision(name + "[" + std::to_string(k) + "]");
        info.ids.push_back(id);
        names.push_back(sym(id));
    }
    VarSet ext(names);
    Polynomial p(ext);
    for (size_t k = 0; k < basis.size(); ++k) {
        Mono m(static_cast<size_t>(ext.size()), 0);
        for (int i = 0; i < vars.size(); ++i) m[static_cast<size_t>(i)] = basis[k][static_cast<size_t>(i)];
        m[static_cast<size_t>(vars.size()) + k] = 1;
        p.set_coeff(m, 1.0);
    }
    templates_.push_back(std::move(info));
    return p;
}

void SosProgram::add_equality(const std::map<int, double>& coeffs, double rhs) {
    for (auto& [id, c] : coeffs) {
        (void)c;
        if (id < 0 || id >= ndecisions()) throw Error("add_equality: bad decision id");
    }
    equalities_.emplace_back(coeffs, rhs);
}

void SosProgram::add_sos(Constraint c) {
    if (c.main_basis.empty()) throw Error("add_sos: empty Gram basis");
    // every non-decision variable of expr must be a target variable
    for (const auto& n : c.expr.vars().names())
        if (!decision_id(n) && c.target_vars.index(n) < 0)
            throw Error("add_sos(" + c.name + "): variable '" + n +
                        "' is not a target variable");
    constraints_.push_back(std::move(c));
}

std::string SosProgram::dump() const {
    std::ostringstream os;
    os << "sos-program v1\ndecisions " << ndecisions() << "\n";
    for (const auto& t : templates_)
        os << "template " << t.name << " vars " << t.vars.size() << " basis "
           << t.basis.size() << "\n";
    for (const auto& c : constraints_) {
        os << "constraint " << c.name << " basis " << c.main_basis.size()
           << " multipliers " << c.multipliers.size() << "\n";
        os << "  expr " << c.expr.to_string() << "\n";
    }
    os << "objective";
    for (auto& [id, v] : objective_) os << " " << id << ":" << v;
    os << "\n";
    return os.str();
}

SosProgram::Compiled SosProgram::compile() const {
    Compiled out;
    const int nd = ndecisions();
    out.ndecisions = nd;

    // z layout: decisions first, then Gram blocks
    std::vector<ConeBlock> blocks;
    if (nd > 0) blocks.push_back({ConeBlock::Free, nd});
    int off = nd;
    out.main.resize(constraints_.size());
    out.mults.resize(constraints_.size());
    for (size_t ci = 0; ci < constraints_.size(); ++ci) {
        const auto& c = constraints_[ci];
        int side = static_cast<int>(c.main_basis.size());
        out.main[ci] = {off, side};
        blocks.push_back({ConeBlock::Psd, side});
        off += side * (side + 1) / 2;
        for (const auto& m : c.multipliers) {
            int ms = static_cast<int>(m.basis.size());
            out.mults[ci].push_back({off, ms});
            blocks.push_back({ConeBlock::Psd, ms});
            off += ms * (ms + 1) / 2;
        }
    }
    const int nvars = off;

    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> rhs;
    int row = 0;

    for (size_t ci = 0; ci < constraints_.size(); ++ci) {
        const auto& c = constraints_[ci];
        // coefficient-matching rows keyed by target-variable monomial
        struct RowData {
            std::map<int, double> dec;            // decision coefficients
            double cst = 0;                        // known part of expr
            std::map<int, double> gram;            // z index -> coefficient
        };
        std::map<Mono, RowData, GrlexLess> rowmap;

        // expr: split each term into target monomial x optional decision sym
        const VarSet& evs = c.expr.vars();
        std::vector<int> tgt_index(static_cast<size_t>(evs.size()), -1);
        std::vector<int> dec_index(static_cast<size_t>(evs.size()), -1);
        for (int i = 0; i < evs.size(); ++i) {
            if (auto id = decision_id(evs.name(i))) {
                if (*id >= nd) throw Error("compile: unknown decision symbol " + evs.name(i));
                dec_index[static_cast<size_t>(i)] = *id;
            } else {
                tgt_index[static_cast<size_t>(i)] = c.target_vars.index(evs.name(i));
            }
        }
        for (const auto& [m, coef] : c.expr.terms()) {
            Mono key(static_cast<size_t>(c.target_vars.size()), 0);
            int dec = -1;
            for (size_t i = 0; i < m.size(); ++i) {
                if (m[i] == 0) continue;
                if (dec_index[i] >= 0) {
                    if (m[i] > 1 || dec >= 0)
                        throw Error("compile(" + c.name + "): expression is not affine in decisions");
                    dec = dec_index[i];
                } else {
                    key[static_cast<size_t>(tgt_index[i])] = m[i];
                }
            }
            auto& rd = rowmap[key];
            if (dec >= 0)
                rd.dec[dec] += coef;
            else
                rd.cst += coef;
        }

        auto add_gram = [&](const GramLoc& loc, const std::vector<Mono>& basis,
                            const Polynomial* g) {
            for (int i = 0; i < loc.side; ++i)
                for (int j = 0; j <= i; ++j) {
                    int z = loc.offset + i * (i + 1) / 2 + j;
                    double scale = i == j ? 1.0 : kSqrt2;
                    Mono prod(static_cast<size_t>(c.target_vars.size()), 0);
                    for (size_t k = 0; k < prod.size(); ++k)
                        prod[k] = basis[static_cast<size_t>(i)][k] +
                                  basis[static_cast<size_t>(j)][k];
                    if (!g) {
                        rowmap[prod].gram[z] += scale;
                    } else {
                        const VarSet& gv = g->vars();
                        for (const auto& [gm, gc] : g->terms()) {
                            Mono key = prod;
                            for (size_t k = 0; k < gm.size(); ++k) {
                                if (gm[k] == 0) continue;
                                int ti = c.target_vars.index(gv.name(static_cast<int>(k)));
                                if (ti < 0)
                                    throw Error("compile(" + c.name +
                                                "): multiplier domain uses non-target variable");
                                key[static_cast<size_t>(ti)] += gm[k];
                            }
                            rowmap[key].gram[z] += scale * gc;
                        }
                    }
                }
        };
        add_gram(out.main[ci], c.main_basis, nullptr);
        for (size_t mi = 0; mi < c.multipliers.size(); ++mi)
            add_gram(out.mults[ci][mi], c.multipliers[mi].basis, &c.multipliers[mi].g);

        for (const auto& [key, rd] : rowmap) {
            (void)key;
            bool any = false;
            for (auto& [id, v] : rd.dec)
                if (v != 0.0) {
                    trips.emplace_back(row, id, v);
                    any = true;
                }
            for (auto& [z, v] : rd.gram)
                if (v != 0.0) {
                    trips.emplace_back(row, z, -v);
                    any = true;
                }
            if (!any && std::abs(rd.cst) > 1e-12)
                throw Error("compile(" + c.name +
                            "): monomial outside Gram basis span (coefficient " +
                            std::to_string(rd.cst) + ")");
            if (!any) continue;
            rhs.push_back(-rd.cst);
            ++row;
        }
    }

    for (const auto& [coeffs, r] : equalities_) {
        for (auto& [id, v] : coeffs)
            if (v != 0.0) trips.emplace_back(row, id, v);
        rhs.push_back(r);
        ++row;
    }

    ConicProgram& p = out.prog;
    p.c = Eigen::VectorXd::Zero(nvars);
    for (auto& [id, v] : objective_) p.c[id] = v;
    p.h = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<long>(rhs.size()));
    p.A.resize(row, nvars);
    p.A.setFromTriplets(trips.begin(), trips.end());
    p.blocks = blocks;
    p.validate();
    return out;
}

Polynomial substitute_decisions(const Polynomial& p, const Eigen::VectorXd& d) {
    std::map<std::string, Polynomial> sub;
    for (const auto& n : p.vars().names())
        if (auto id = decision_id(n)) {
            if (*id >= d.size()) throw Error("substitute_decisions: missing value");
            sub[n] = Polynomial::constant(d[*id]);
        }
    if (sub.empty()) return p;
    return substitute(p, sub);
}

Polynomial gram_poly(const Eigen::MatrixXd& G, const VarSet& vars,
                     const std::vector<Mono>& basis) {
    Polynomial out(vars);
    int side = static_cast<int>(basis.size());
    for (int i = 0; i < side; ++i)
        for (int j = i; j < side; ++j) {
            double v = (i == j ? 1.0 : 2.0) * G(i, j);
            if (v == 0.0) continue;
            Mono prod(static_cast<size_t>(vars.size()), 0);
            for (size_t k = 0; k < prod.size(); ++k)
                prod[k] = basis[static_cast<size_t>(i)][k] + basis[static_cast<size_t>(j)][k];
            out.set_coeff(prod, out.coeff(prod) + v);
        }
    return out;
}

SosSolution sos_solve(const SosProgram& sp, const SolveOptions& opts) {
    auto compiled = sp.compile();
    SosSolution sol;
    sol.conic = solve(compiled.prog, opts);
    sol.status = sol.conic.status;
    if (sol.status == SolveStatus::Infeasible) return sol;
    sol.decisions = sol.conic.z.head(compiled.ndecisions);
    sol.objective = compiled.prog.c.dot(sol.conic.z);

    auto extract = [&](const SosProgram::GramLoc& loc) {
        Eigen::VectorXd seg = sol.conic.z.segment(loc.offset, loc.side * (loc.side + 1) / 2);
        return project_psd(smat(seg, loc.side));
    };
    const auto& cons = sp.constraints();
    for (size_t ci = 0; ci < cons.size(); ++ci) {
        SosSolution::Grams g;
        g.main = extract(compiled.main[ci]);
        for (size_t mi = 0; mi < cons[ci].multipliers.size(); ++mi)
            g.mults.push_back(extract(compiled.mults[ci][mi]));
        Polynomial delta = substitute_decisions(cons[ci].expr, sol.decisions);
        delta = csum({delta, -gram_poly(g.main, cons[ci].target_vars, cons[ci].main_basis)});
        for (size_t mi = 0; mi < cons[ci].multipliers.size(); ++mi) {
            const auto& m = cons[ci].multipliers[mi];
            delta = csum({delta, -cmul(gram_poly(g.mults[mi], cons[ci].target_vars, m.basis),
                                       m.g)});
        }
        g.residual = max_abs_coeff(delta);
        sol.grams.push_back(std::move(g));
    }
    return sol;
}

}  // namespace pdebound
