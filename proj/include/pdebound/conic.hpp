#ifndef PDEBOUND_CONIC_HPP
#define PDEBOUND_CONIC_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

namespace pdebound {

// Conic program in the standard form
//   minimize    c'z
//   subject to  A z = h,   z in K
// where K is a product of free, nonnegative and PSD cones partitioning z.
// A psd(side) block stores the lower triangle of a side x side symmetric
// matrix row-wise with off-diagonal entries scaled by sqrt(2) (svec), so the
// block inner product equals the matrix trace inner product.
struct ConeBlock {
    enum Kind { Free, NonNeg, Psd };
    Kind kind;
    int size;  // dimension for Free/NonNeg, matrix side for Psd

    int dim() const { return kind == Psd ? size * (size + 1) / 2 : size; }
};

struct ConicProgram {
    Eigen::VectorXd c;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd h;
    std::vector<ConeBlock> blocks;

    int nvars() const;
    void validate() const;  // throws on dimension mismatch

    // Documented sparse text dump (header with block layout, then COO
    // triples) for cross-checking against external solvers.
    std::string dump() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIters };

struct ConicSolution {
    Eigen::VectorXd z;       // primal
    // Dual for the equality rows, with the convention that c + A'y lies in
    // the dual cone of K at optimality and the dual objective is -h'y.
    Eigen::VectorXd y;
    Eigen::VectorXd y_full;  // dual including cone-membership rows
    SolveStatus status = SolveStatus::MaxIters;
    double primal_res = 0, dual_res = 0, gap = 0;
    int iterations = 0;
    // Improving-ray certificate (dual ray for equalities) when infeasible:
    // A'ray in the polar of K and h'ray > 0.
    Eigen::VectorXd infeas_ray;
};

struct SolveOptions {
    double tol = 1e-7;
    int max_iters = 200000;
    double infeas_tol = 1e-9;
    bool verbose = false;
};

ConicSolution solve(const ConicProgram& p, const SolveOptions& opts = {});

struct Residuals {
    double primal;  // max of |Az-h|_inf and cone distance of z
    double dual;    // distance of c - A'y from the dual cone of K
    double gap;     // |c'z - h'y|
};

// Recomputed from scratch, independent of solver internals.
Residuals residuals(const ConicProgram& p, const ConicSolution& s);

// svec/smat helpers (lower triangle row-wise, off-diagonals * sqrt(2)).
Eigen::VectorXd svec(const Eigen::MatrixXd& S);
Eigen::MatrixXd smat(const Eigen::VectorXd& v, int side);

// Projection onto the PSD cone by eigenvalue clipping (dense symmetric).
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& S);

}  // namespace pdebound

#endif
