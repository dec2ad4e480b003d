#ifndef PDEBOUND_POLY_HPP
#define PDEBOUND_POLY_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdebound {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ordered set of variable identifiers. The order is total and fixes both the
// graded-lex monomial order and the canonical text serialization.
class VarSet {
  public:
    VarSet() = default;
    explicit VarSet(std::vector<std::string> names);

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_[static_cast<size_t>(i)]; }
    const std::vector<std::string>& names() const { return names_; }
    int index(std::string_view name) const;  // -1 if absent
    bool contains(std::string_view name) const { return index(name) >= 0; }

    bool operator==(const VarSet& o) const { return names_ == o.names_; }

    // Order-consistent union: both inputs must be subsequences of the result.
    // Throws on an ordering conflict (same names, incompatible positions).
    static VarSet merged(const VarSet& a, const VarSet& b);

  private:
    std::vector<std::string> names_;
};

// Exponent vector, same length as the owning VarSet.
using Mono = std::vector<int>;

inline int mono_degree(const Mono& m) {
    int d = 0;
    for (int e : m) d += e;
    return d;
}

// Graded lexicographic order.
struct GrlexLess {
    bool operator()(const Mono& a, const Mono& b) const {
        int da = mono_degree(a), db = mono_degree(b);
        if (da != db) return da < db;
        return a < b;
    }
};

// Sparse multivariate polynomial with double coefficients. Immutable in
// spirit: all operations return new values, nothing mutates in place through
// the public surface, so values are safe to share across threads.
class Polynomial {
  public:
    using TermMap = std::map<Mono, double, GrlexLess>;

    Polynomial() = default;  // zero over the empty VarSet
    explicit Polynomial(VarSet vars) : vars_(std::move(vars)) {}

    static Polynomial constant(double c);
    static Polynomial variable(const VarSet& vars, int index);
    static Polynomial variable(const VarSet& vars, std::string_view name);

    const VarSet& vars() const { return vars_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int total_degree() const;
    int degree_in(int var_index) const;
    int degree_in(std::string_view name) const;

    double coeff(const Mono& m) const;
    void set_coeff(const Mono& m, double c);  // prunes exact zeros

    // Re-expresses the polynomial over a superset VarSet.
    Polynomial aligned_to(const VarSet& target) const;

    Polynomial operator-() const;
    Polynomial& prune(double eps);

    std::string to_string() const;  // canonical: grlex-sorted, "c * x^a u0^b"

  private:
    VarSet vars_;
    TermMap terms_;
};

Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator-(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double s, const Polynomial& p);
Polynomial operator*(const Polynomial& p, double s);
Polynomial operator+(const Polynomial& a, double c);
Polynomial operator-(const Polynomial& a, double c);

// Formal partial derivative; all other variables (jets included) are
// independent symbols. Throws if the variable is unknown.
Polynomial differentiate(const Polynomial& p, std::string_view var);

// Exact composition. Every binding replaces one variable by a polynomial;
// unbound variables pass through. Throws if a binding target name collides
// with a variable being eliminated.
Polynomial substitute(const Polynomial& p,
                      const std::map<std::string, Polynomial>& bindings);

// Numeric evaluation with compensated (Kahan) accumulation. The point must
// cover every variable that actually occurs in p.
double evaluate(const Polynomial& p, const std::map<std::string, double>& point);

// Exact antiderivative in `var` evaluated on [lo,hi]; result no longer
// depends on `var`.
Polynomial integrate(const Polynomial& p, std::string_view var, double lo, double hi);

// Re-expresses p over `target`, which must contain every variable p uses but
// may order them differently (unlike aligned_to, which preserves order).
Polynomial reordered(const Polynomial& p, const VarSet& target);

// Term-map comparison after pruning coefficients below eps.
bool almost_equal(const Polynomial& a, const Polynomial& b, double eps = 1e-14);

double max_abs_coeff(const Polynomial& p);

// Parses the canonical serialization plus ordinary infix expressions:
// numbers, identifiers, + - * ^ and parentheses. `params` supplies numeric
// values for named constants ("pi" is always available). Variables are laid
// out in `vars` order; unknown identifiers that are not params throw unless
// `vars` is null, in which case a VarSet is inferred.
Polynomial parse_polynomial(std::string_view text, const VarSet& vars,
                            const std::map<std::string, double>& params = {});

}  // namespace pdebound

#endif
