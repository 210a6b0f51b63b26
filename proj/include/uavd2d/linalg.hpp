#ifndef UAVD2D_LINALG_HPP
#define UAVD2D_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace uavd2d {

// Dense column-agnostic square matrix helpers sized for the solver cores
// (tens of variables). Row-major storage.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    void set_zero() { a_.assign(n_ * n_, 0.0); }

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

// In-place lower Cholesky of a symmetric positive definite matrix.
// Returns false if a pivot drops below tol (not positive definite).
inline bool cholesky(SquareMatrix& a, double tol = 0.0) {
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > tol)) return false;
        const double lj = std::sqrt(d);
        a(j, j) = lj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / lj;
        }
    }
    return true;
}

// Solves L L^T x = b given the Cholesky factor from cholesky().
inline void cholesky_solve(const SquareMatrix& l, std::vector<double>& b) {
    const std::size_t n = l.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
        b[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * b[k];
        b[ii] = s / l(ii, ii);
    }
}

}  // namespace uavd2d

#endif
