#ifndef PDEBOUND_CALCULUS_HPP
#define PDEBOUND_CALCULUS_HPP

#include <Eigen/Dense>

#include "pdebound/jets.hpp"
#include "pdebound/poly.hpp"

namespace pdebound {

// Symmetric polynomial matrix in (t,x) (entries may also carry decision
// symbols, staying affine in them).
struct SymMatrixPoly {
    int side = 0;
    std::vector<Polynomial> ent;  // upper triangle, row-major

    SymMatrixPoly() = default;
    explicit SymMatrixPoly(int s) : side(s), ent(static_cast<size_t>(s * (s + 1) / 2)) {}

    const Polynomial& at(int i, int j) const;
    void set(int i, int j, Polynomial p);
    SymMatrixPoly map(const std::map<std::string, Polynomial>& bindings) const;
    // Numeric evaluation at a point covering every variable used.
    Eigen::MatrixXd evaluate_at(const std::map<std::string, double>& point) const;
};

// Slot layout of the quadratic forms. With `homogenize` the vector is
// (1, D^k u); the constant slot lets the derivative identity produce terms
// affine (not just quadratic) in the jets.
struct SlotLayout {
    std::vector<int> orders;  // max jet order per component
    bool homogenize = false;

    int ncomp() const { return static_cast<int>(orders.size()); }
    int dim() const;
    // Slot polynomials over the jet VarSet (constant slot first if present).
    std::vector<Polynomial> slots() const;
    std::vector<std::string> slot_names() const;  // "1" for the constant slot
};

// The slack-form construction: given symmetric H(t,x) on the slot vector
// v = (1?, D^{k}u) of `low`, returns Hbar on (1?, D^{k+1}u) such that
//   z' Hbar z = v' (dH/dx) v + 2 v' H (dv/dx)
// holds as an exact polynomial identity, where z is the raised slot vector
// and dv/dx is the componentwise total x-derivative of v.
SymMatrixPoly hbar(const SymMatrixPoly& H, const SlotLayout& low);

// z' M z as a Polynomial in (t, x, jets) for M on the layout `lay`.
Polynomial quadratic_form(const SymMatrixPoly& M, const SlotLayout& lay);

// Boundary value of the H form: v' H v with jets replaced by derivatives of
// the given fields evaluated at x = at (fields are polynomials in (t,x)).
Polynomial boundary_form(const SymMatrixPoly& H, const SlotLayout& lay,
                         const std::vector<Polynomial>& fields, double at);

// Sanity check of the underlying calculus identity: for concrete polynomial
// fields u(t,x), int_0^1 quadratic_form(hbar(H)) dx must equal the boundary
// form at 1 minus at 0. Returns the max |coefficient| of the difference.
double ftc_residual(const SymMatrixPoly& H, const SlotLayout& low,
                    const std::vector<Polynomial>& fields);

// Reduction of the boundary condition to the admissible subspace. Q acts on
// the stacked non-constant jets [D^{qa-1}u(t,1); D^{qa-1}u(t,0)] where
// qa_orders gives the per-component jet count of Q's columns; H lives on the
// (possibly homogenized, possibly higher-order) layout `lay`. Zero columns
// are appended for jet orders Q does not constrain. Returns the quadratic
// form in (t, w1..wk) — w parametrizing null(Q) — that must be <= 0, plus
// the orthonormal basis used.
struct BoundaryReduction {
    Polynomial form;        // in (t, w...), affine in any decision symbols
    int nfree = 0;          // number of w coordinates
    Eigen::MatrixXd basis;  // (2 * jet dim) x nfree, orthonormal
    bool trivial = false;   // null space empty and no constant slot content
    // Admissible slot values per end, as polynomials in the w coordinates;
    // aligned with the layout's slots (constant slot first if homogenized).
    std::vector<Polynomial> slots1, slots0;
};
// Reduces the boundary values of the telescoped quadratic form to the
// admissible set. When the dynamics right-hand sides are supplied, the
// boundary conditions are also differentiated in time along them (d/dt of a
// constrained jet is the total x-derivative of F), which constrains the
// higher-order jets that classical solutions satisfy at the ends; derived
// rows that are nonlinear, time-varying, or beyond the slot space are
// dropped (which is sound: a larger admissible set is only stricter).
BoundaryReduction boundary_reduce(const SymMatrixPoly& H, const SlotLayout& lay,
                                  const Eigen::MatrixXd& Q,
                                  const std::vector<int>& qa_orders,
                                  const SymMatrixPoly* F0 = nullptr,
                                  const SymMatrixPoly* F1 = nullptr,
                                  const std::vector<Polynomial>* Fdyn = nullptr);

// d/dt along the dynamics: dt b + sum over jets v = dx^j u_c of
// (db/dv) * total_x^j(F_c). Output jets rise to (order of b) + (order of F).
Polynomial lie_derivative(const Polynomial& b, const std::vector<Polynomial>& F,
                          int ncomp);

}  // namespace pdebound

#endif
