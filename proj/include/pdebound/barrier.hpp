#ifndef PDEBOUND_BARRIER_HPP
#define PDEBOUND_BARRIER_HPP

#include <string>
#include <vector>

#include "pdebound/calculus.hpp"
#include "pdebound/oracle.hpp"
#include "pdebound/soscomp.hpp"
#include "pdebound/transform.hpp"

namespace pdebound {

// No certificate of the requested degrees exists (or the bound is unbounded).
struct InfeasibleError : Error {
    using Error::Error;
};

// A certificate is being verified against a different problem.
struct HashMismatchError : Error {
    using Error::Error;
};

// Degree knobs for the synthesized certificate pieces.
struct BarrierSpec {
    int b_t_degree = 2;    // t-degree of b's coefficients
    int b_x_degree = 2;    // x-degree of b's coefficients
    int b_jet_degree = 2;  // total jet degree of b
    int gamma_degree = 7;  // gamma(t) degree for time-integrated bounds
    int h_degree = 2;      // (t,x)-degree of the H matrices
    int p_degree = 1;      // degree of the auxiliary boundary polynomial p
    double epsilon = 1e-6; // strictness margin of the unsafe-set condition
    SolveOptions solver;
};

struct Certificate {
    int schema = 1;
    Polynomial b;       // barrier integrand b(t, x, D u)
    Polynomial p;       // auxiliary boundary polynomial (zero when unused)
    bool has_p = false;
    Polynomial gamma;   // gamma(t); a constant polynomial for terminal bounds
    bool time_integrated = false;
    double bound = 0.0; // gamma(T); gamma(0) = 0 by construction
    SymMatrixPoly H1, H2;  // numeric slack matrices (decision-free)
    struct MultTerm {
        std::string constraint;  // which SOS condition it belongs to
        Polynomial sigma;        // SOS multiplier as a polynomial
        Polynomial g;            // domain polynomial it multiplies
    };
    std::vector<MultTerm> multipliers;
    double solver_residual = 0.0;
    int iterations = 0;
    std::string problem_hash;
};

struct VerificationReport {
    bool replay_ok = false;
    double replay_slack = 0.0;  // min-slack optimum of the pinned feasibility
    bool sample_ok = false;
    double worst_violation = 0.0;  // most negative sampled SOS value
    bool verified = false;
    std::string detail;
};

enum class VerifyMode { Replay, Sample, Both };

struct VerifyOptions {
    VerifyMode mode = VerifyMode::Both;
    double slack_tol = 1e-4;
    double sample_tol = 1e-4;
    unsigned seed = 0;
    double jet_box = 10.0;  // sampling box |d^j u| <= jet_box
    int samples = 200;
    bool force = false;  // skip the problem-hash check
};

// Minimal-terminal-bound synthesis: y(T) <= bound for every solution.
Certificate synthesize_terminal(const PdeProblem& prob, const OutputFunctional& y,
                                const BarrierSpec& spec);

// Time-integrated bound: integral_0^T y(t) dt <= bound.
Certificate synthesize_time_integrated(const PdeProblem& prob, const OutputFunctional& y,
                                       const BarrierSpec& spec);

// Independent re-check: replay re-solves the multiplier/H feasibility with
// b, p, gamma pinned to the certificate (min-slack); sample evaluates the
// SOS conditions on a deterministic low-discrepancy grid.
VerificationReport verify_certificate(const PdeProblem& prob, const OutputFunctional& y,
                                      const Certificate& cert, const BarrierSpec& spec,
                                      const VerifyOptions& opts = {});

// FNV-1a digest of the canonical problem + functional description.
std::string problem_hash(const PdeProblem& prob, const OutputFunctional& y);

}  // namespace pdebound

#endif
