#pragma once

#include <vector>

#include "polymart/ratfunc.hpp"

namespace polymart {

// Dense matrix over the rational function field.
class RFMatrix {
public:
    RFMatrix() = default;
    RFMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    static RFMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    RatFunc& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const RatFunc& at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    friend bool operator==(const RFMatrix&, const RFMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<RatFunc> a_;
};

// Solves A x = b exactly. Denominators are cleared per row, the polynomial
// system is reduced by fraction-free (Bareiss) elimination, and the solution
// is recovered by back substitution. Throws SingularSystem when A is
// singular as a matrix over the function field.
std::vector<RatFunc> solve_linear(const RFMatrix& A, const std::vector<RatFunc>& b);

RatFunc determinant(const RFMatrix& A);

// Exact determinant of a matrix of rationals (Gaussian elimination).
Rational rational_det(std::vector<std::vector<Rational>> m);

} // namespace polymart
