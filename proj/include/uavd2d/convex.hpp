#ifndef UAVD2D_CONVEX_HPP
#define UAVD2D_CONVEX_HPP

#include <vector>

#include "uavd2d/linalg.hpp"

namespace uavd2d {

// Smooth concave maximization over box bounds plus concave inequality
// constraints g_i(x) >= 0. Callers provide value/gradient/Hessian callbacks;
// all quantities should be pre-scaled to order one.
class ConcaveProgram {
public:
    virtual ~ConcaveProgram() = default;
    virtual int dim() const = 0;
    virtual int num_ineq() const = 0;
    // Writes the gradient and Hessian when the pointers are non-null.
    virtual double objective(const std::vector<double>& x, std::vector<double>* grad,
                             SquareMatrix* hess) const = 0;
    virtual double inequality(int i, const std::vector<double>& x, std::vector<double>* grad,
                              SquareMatrix* hess) const = 0;
};

struct BarrierOptions {
    double t0 = 8.0;            // initial barrier weight
    double mu = 25.0;           // barrier weight growth per stage
    double gap_tol = 1e-8;      // target (constraint count)/t
    double newton_tol = 1e-11;  // half squared Newton decrement
    int max_newton_per_stage = 60;
};

struct BarrierResult {
    std::vector<double> x;
    double objective = 0.0;
    bool converged = false;
    int newton_steps = 0;
};

// Interior-point path following. x0 must be strictly feasible (all g_i > 0
// and strictly inside the box); converged=false signals a bad start or a
// breakdown rather than throwing, so callers can fall back.
BarrierResult maximize_concave(const ConcaveProgram& p, const std::vector<double>& lo,
                               const std::vector<double>& hi, std::vector<double> x0,
                               const BarrierOptions& opt = {});

}  // namespace uavd2d

#endif
