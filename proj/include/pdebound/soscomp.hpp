#ifndef PDEBOUND_SOSCOMP_HPP
#define PDEBOUND_SOSCOMP_HPP

#include <map>
#include <string>
#include <vector>

#include "pdebound/conic.hpp"
#include "pdebound/jets.hpp"
#include "pdebound/poly.hpp"

namespace pdebound {

// Monomial basis enumeration with optional caps: per-variable degree caps, a
// cap on the combined degree across jet variables, and one across t and x.
struct BasisCaps {
    std::map<std::string, int> per_var;
    int jet_total = -1;
    int tx_total = -1;
};
std::vector<Mono> monomial_basis(const VarSet& vars, int max_degree,
                                 const BasisCaps& caps = {});

// A program over scalar decision variables that appear affinely inside
// polynomial expressions. Decision variable k is embedded in polynomials as
// the symbol "q{k}", so polynomial templates are ordinary Polynomials and all
// of poly/jets/calculus applies to them unchanged.
class SosProgram {
  public:
    int add_decision(const std::string& label);
    static std::string sym(int id) { return "q" + std::to_string(id); }
    int ndecisions() const { return static_cast<int>(labels_.size()); }
    const std::string& label(int id) const { return labels_[static_cast<size_t>(id)]; }

    // Fresh decision coefficients, one per basis monomial; returns the
    // resulting polynomial sum_i q_i * m_i over vars + the new symbols.
    struct TemplateInfo {
        std::string name;
        VarSet vars;
        std::vector<Mono> basis;
        std::vector<int> ids;
    };
    Polynomial add_template(const std::string& name, const VarSet& vars,
                            const std::vector<Mono>& basis);
    const std::vector<TemplateInfo>& templates() const { return templates_; }

    // Linear equality sum_k coeffs[k] * d_k = rhs.
    void add_equality(const std::map<int, double>& coeffs, double rhs);
    void fix(int id, double value) { add_equality({{id, 1.0}}, value); }

    struct Multiplier {
        Polynomial g;            // known domain polynomial (e.g. x(1-x))
        std::vector<Mono> basis; // Gram basis of the SOS multiplier, over target vars
    };
    // Constrains expr == sigma_0 + sum_j sigma_j * g_j with every sigma SOS
    // (Gram-PSD over the given bases). expr must be affine in the decision
    // symbols; all non-decision variables must lie in target_vars.
    struct Constraint {
        std::string name;
        Polynomial expr;
        VarSet target_vars;
        std::vector<Mono> main_basis;
        std::vector<Multiplier> multipliers;
    };
    void add_sos(Constraint c);
    const std::vector<Constraint>& constraints() const { return constraints_; }

    void set_objective(const std::map<int, double>& lin) { objective_ = lin; }

    std::string dump() const;

    struct GramLoc {
        int offset = 0;  // into z
        int side = 0;
    };
    struct Compiled {
        ConicProgram prog;
        int ndecisions = 0;
        std::vector<GramLoc> main;                // per constraint
        std::vector<std::vector<GramLoc>> mults;  // per constraint
    };
    Compiled compile() const;

  private:
    std::vector<std::string> labels_;
    std::vector<TemplateInfo> templates_;
    std::vector<Constraint> constraints_;
    std::vector<std::pair<std::map<int, double>, double>> equalities_;
    std::map<int, double> objective_;
};

struct SosSolution {
    SolveStatus status = SolveStatus::MaxIters;
    Eigen::VectorXd decisions;
    double objective = 0;
    ConicSolution conic;
    struct Grams {
        Eigen::MatrixXd main;                 // PSD-clipped
        std::vector<Eigen::MatrixXd> mults;   // PSD-clipped
        double residual = 0;  // max |coeff| of expr - m'Gm - sum sigma_j g_j
    };
    std::vector<Grams> grams;  // per constraint; filled when status != Infeasible
};

SosSolution sos_solve(const SosProgram& sp, const SolveOptions& opts = {});

// Replaces every decision symbol q{k} by d[k].
Polynomial substitute_decisions(const Polynomial& p, const Eigen::VectorXd& d);

// m' G m over the given basis.
Polynomial gram_poly(const Eigen::MatrixXd& G, const VarSet& vars,
                     const std::vector<Mono>& basis);

}  // namespace pdebound

#endif
