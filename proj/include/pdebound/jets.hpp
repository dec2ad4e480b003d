#ifndef PDEBOUND_JETS_HPP
#define PDEBOUND_JETS_HPP

#include <optional>

#include "pdebound/poly.hpp"

namespace pdebound {

// Per-component maximum spatial derivative orders.
struct MultiIndex {
    std::vector<int> orders;

    int ncomp() const { return static_cast<int>(orders.size()); }
    // Length of the jet vector (u_i, dx u_i, ..., dx^{a_i} u_i).
    int jet_len() const {
        int n = 0;
        for (int a : orders) n += a + 1;
        return n;
    }
    MultiIndex lowered() const {  // alpha - 1 componentwise, floored at 0
        MultiIndex m = *this;
        for (int& a : m.orders) a = a > 0 ? a - 1 : 0;
        return m;
    }
    MultiIndex raised(int k = 1) const {
        MultiIndex m = *this;
        for (int& a : m.orders) a += k;
        return m;
    }
};

struct JetVar {
    int component;
    int order;
};

// Jet coordinate names: single-component problems use "u0","u1",... where
// "u{j}" is dx^j u; multi-component problems use "u{c+1}_{j}".
std::string jet_name(int component, int order, int ncomp);
std::optional<JetVar> parse_jet_name(std::string_view name);

// Ordered jet coordinate names for D^alpha u: components grouped, derivative
// order ascending.
std::vector<std::string> jet_vector(const MultiIndex& alpha, int ncomp);

// VarSet (t, x, jets of D^alpha u).
VarSet jet_varset(const MultiIndex& alpha, int ncomp, bool with_t = true,
                  bool with_x = true);

// Total spatial derivative with jet prolongation:
//   dx p + sum over jets v of (dp/dv) * (next-order jet of v).
// The output VarSet is extended with order+1 jets as needed.
Polynomial total_x(const Polynomial& p);

// total_x applied k times.
Polynomial total_x_n(const Polynomial& p, int k);

// Canonical global variable order: t, x, jets (component then order), then
// remaining names by (alphabetic stem, numeric suffix). Re-aligning operands
// to this order makes sums/products over differently-built VarSets safe.
bool canonical_name_less(const std::string& a, const std::string& b);
VarSet canonical_vars(const std::vector<const Polynomial*>& ps,
                      const std::vector<std::string>& extra = {});
// Sum/product with operands reordered into the canonical union first.
Polynomial csum(const std::vector<Polynomial>& ps);
Polynomial cmul(const Polynomial& a, const Polynomial& b);

// Drops variables that no longer occur and reorders the rest canonically.
Polynomial compacted(const Polynomial& p);

}  // namespace pdebound

#endif
