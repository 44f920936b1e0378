#include "polymart/linalg.hpp"

#include <utility>

namespace polymart {

RFMatrix RFMatrix::identity(std::size_t n) {
    RFMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = RatFunc(1);
    return m;
}

namespace {

MPoly poly_lcm(const MPoly& a, const MPoly& b) {
    if (a.is_zero() || b.is_zero()) return MPoly();
    return make_primitive(exact_divide(a * b, gcd(a, b)));
}

// Row-scaled polynomial copy of [A | extra]: every row is multiplied by the
// lcm of its denominators. Returns the scale factors used.
struct ClearedRows {
    std::vector<std::vector<MPoly>> m;
    std::vector<MPoly> scale;
};

ClearedRows clear_denominators(const RFMatrix& A, const std::vector<RatFunc>* extra) {
    const std::size_t n = A.rows();
    const std::size_t cols = A.cols() + (extra ? 1 : 0);
    ClearedRows out;
    out.m.assign(n, std::vector<MPoly>(cols));
    out.scale.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        MPoly l(1);
        for (std::size_t j = 0; j < A.cols(); ++j) l = poly_lcm(l, A.at(i, j).den());
        if (extra) l = poly_lcm(l, (*extra)[i].den());
        for (std::size_t j = 0; j < A.cols(); ++j) {
            const RatFunc& e = A.at(i, j);
            out.m[i][j] = e.num() * exact_divide(l, e.den());
        }
        if (extra) out.m[i][A.cols()] = (*extra)[i].num() * exact_divide(l, (*extra)[i].den());
        out.scale.push_back(std::move(l));
    }
    return out;
}

// Fraction-free forward elimination in place. Returns the permutation sign,
// or 0 if the matrix (first `n` columns) is singular. After success,
// m[k][k] is the k-th leading minor of the row-scaled matrix up to sign.
int bareiss_forward(std::vector<std::vector<MPoly>>& m, std::size_t n) {
    int sign = 1;
    MPoly prev(1);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && m[p][k].is_zero()) ++p;
        if (p == n) return 0;
        if (p != k) {
            std::swap(m[p], m[k]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < m[i].size(); ++j)
                m[i][j] = exact_divide(m[i][j] * m[k][k] - m[i][k] * m[k][j], prev);
            m[i][k] = MPoly();
        }
        prev = m[k][k];
    }
    return sign;
}

} // namespace

std::vector<RatFunc> solve_linear(const RFMatrix& A, const std::vector<RatFunc>& b) {
    const std::size_t n = A.rows();
    if (A.cols() != n) throw std::logic_error("solve_linear: matrix must be square");
    if (b.size() != n) throw std::logic_error("solve_linear: size mismatch");
    if (n == 0) return {};

    auto cleared = clear_denominators(A, &b);
    auto& m = cleared.m;
    if (bareiss_forward(m, n) == 0)
        throw SingularSystem("linear system is singular");

    std::vector<RatFunc> x(n);
    for (std::size_t i = n; i-- > 0;) {
        RatFunc acc(m[i][n]);
        for (std::size_t j = i + 1; j < n; ++j) acc -= RatFunc(m[i][j]) * x[j];
        x[i] = acc / RatFunc(m[i][i]);
    }
    return x;
}

RatFunc determinant(const RFMatrix& A) {
    const std::size_t n = A.rows();
    if (A.cols() != n) throw std::logic_error("determinant: matrix must be square");
    if (n == 0) return RatFunc(1);

    auto cleared = clear_denominators(A, nullptr);
    const int sign = bareiss_forward(cleared.m, n);
    if (sign == 0) return RatFunc();

    RatFunc det(cleared.m[n - 1][n - 1]);
    if (sign < 0) det = -det;
    for (const auto& l : cleared.scale) det /= RatFunc(l);
    return det;
}

Rational rational_det(std::vector<std::vector<Rational>> m) {
    const std::size_t n = m.size();
    for (const auto& row : m)
        if (row.size() != n) throw std::logic_error("rational_det: matrix must be square");

    Rational det = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && m[p][k] == 0) ++p;
        if (p == n) return 0;
        if (p != k) {
            std::swap(m[p], m[k]);
            det = -det;
        }
        det *= m[k][k];
        const Rational inv = 1 / m[k][k];
        for (std::size_t i = k + 1; i < n; ++i) {
            if (m[i][k] == 0) continue;
            const Rational f = m[i][k] * inv;
            for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
        }
    }
    return det;
}

} // namespace polymart
