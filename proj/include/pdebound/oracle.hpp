#ifndef PDEBOUND_ORACLE_HPP
#define PDEBOUND_ORACLE_HPP

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <vector>

#include "pdebound/transform.hpp"

namespace pdebound {

// Method-of-lines reference simulator. Deliberately independent of the
// synthesis pipeline: second-order central differences in space, with
// Crank-Nicolson (linear jet terms implicit, everything else explicit at the
// midpoint) or classic RK4 in time. Single-component problems only; split
// systems are handled by simulating the original unsplit problem.
struct SimOptions {
    enum class Scheme { CrankNicolson, ExplicitRk4 };
    int nx = 201;
    double dt = 1e-5;
    Scheme scheme = Scheme::CrankNicolson;
    int max_saves = 2001;  // save stride keeps at most this many snapshots
    // Optional non-polynomial initial condition (overrides prob.u0).
    std::function<double(double)> u0_override;
};

struct GridSolution {
    int nx = 0;
    double dt = 0;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> values;  // u at grid nodes per saved time
    double h() const { return 1.0 / (nx - 1); }
};

GridSolution simulate(const PdeProblem& prob, const SimOptions& opts = {});

// Jet value d^j u / dx^j at grid node i (second-order stencils; one-sided at
// the ends). Orders 0..2.
double grid_jet(const Eigen::VectorXd& u, double h, int i, int order);

// Evaluates the output functional on the trajectory: at the final time, or
// trapezoid-integrated over time when y.time_integrated is set.
double output_value(const GridSolution& sol, const OutputFunctional& y);

// Instantaneous functional value at saved snapshot index k.
double output_value_at(const GridSolution& sol, const OutputFunctional& y, int k);

// Columnar text: header row "t x0 x1 ...", one row per saved time.
void export_trajectory(const GridSolution& sol, std::ostream& os);

}  // namespace pdebound

#endif
