#ifndef PDEBOUND_TRANSFORM_HPP
#define PDEBOUND_TRANSFORM_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "pdebound/jets.hpp"
#include "pdebound/poly.hpp"

namespace pdebound {

// A 1-D evolution system on x in [0,1]:
//   dt u_c = F_c(t, x, D^{alpha} u),  Q [D^{alpha-1}u(t,1); D^{alpha-1}u(t,0)] = 0.
// Q columns stack the end x=1 jets of every component (orders ascending,
// components grouped) followed by the same block at x=0.
struct PdeProblem {
    int n = 1;
    MultiIndex alpha;
    std::vector<Polynomial> F;   // in (t, x, jets)
    Eigen::MatrixXd Q;
    std::vector<Polynomial> u0;  // in x
    double T = 1.0;
    std::map<std::string, double> params;

    // Per-component change of variables back to the original domain,
    // x_original = offset + scale * x. Empty when no splitting happened.
    struct ComponentMap {
        double offset = 0.0;
        double scale = 1.0;
        int parent = 0;  // original component index
    };
    std::vector<ComponentMap> comap;

    int boundary_jets() const {  // jets per end that Q acts on
        int s = 0;
        for (int a : alpha.orders) s += a;
        return s;
    }
};

// Checks structural consistency (sizes, Q shape, u0 boundary residual).
// Throws Error on violation; `tol` bounds |Q * boundary jets of u0|.
void validate(const PdeProblem& prob, double tol = 1e-9);

// An output functional y(t) = G applied to u. `g` is a polynomial in
// (t, x, D^beta u); for point evaluations the explicit x is fixed to the
// evaluation point during the rewrite.
struct OutputFunctional {
    enum class Kind { BoundaryPoint, InteriorPoint, SubdomainIntegral, FullIntegral };
    Kind kind = Kind::FullIntegral;
    int side = 0;            // BoundaryPoint: 0 or 1
    double x0 = 0.5;         // InteriorPoint
    double x1 = 0.25, x2 = 0.75;  // SubdomainIntegral
    bool time_integrated = false;  // bound integral_0^T y dt instead of y(T)
    Polynomial g;
    MultiIndex beta;
};

// Result of rewriting an output functional as integral_0^1 g dx over a
// (possibly split) problem. When a boundary-point rewrite introduced an
// auxiliary polynomial p(x) = sum_k p_k x^k, its coefficients appear in `g`
// as free symbols "p0".."p{d}" subject to the linear rows
// `p_constraints` (row . (p0..pd) = rhs).
struct FullIntegralForm {
    PdeProblem prob;
    Polynomial g;       // in (t, x, jets of prob, p symbols)
    MultiIndex beta;    // jet orders of g per component of prob
    int p_degree = -1;  // -1: no p template
    std::vector<std::pair<std::vector<double>, double>> p_constraints;
};

// Appendix-style rewrites into full-integral form. BoundaryPoint uses the
// total-derivative trick with a degree-`p_degree` template; InteriorPoint
// splits the domain at x0 and then applies the boundary trick to the left
// component; SubdomainIntegral splits into three components and rescales.
FullIntegralForm to_full_integral(const OutputFunctional& y, const PdeProblem& prob,
                                  int p_degree = 2);

// Domain splitting (exact changes of variables; each piece mapped to [0,1]).
PdeProblem split_at_point(const PdeProblem& prob, double x0);
PdeProblem split_subdomain(const PdeProblem& prob, double x1, double x2);

// Substitution map sending jet (c, j) up to max_order[c] to d^j/dx^j of
// fields[c] (fields are polynomials in (t, x)).
std::map<std::string, Polynomial> jet_bindings(const std::vector<Polynomial>& fields,
                                               const std::vector<int>& max_order);

// Exact integral_0^1 g(t, x, jets(fields)) dx, a polynomial in t (and any
// non-jet symbols g carries, e.g. "p{k}").
Polynomial integral_on_fields(const Polynomial& g, const std::vector<Polynomial>& fields,
                              const std::vector<int>& max_order);

}  // namespace pdebound

#endif
