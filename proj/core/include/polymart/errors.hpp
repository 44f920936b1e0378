#pragma once

#include <stdexcept>
#include <string>

namespace polymart {

// Base class for all library errors. Anything derived from Error signals a
// misuse of the API or bad input data; internal consistency failures use
// std::logic_error directly so they are never silently mapped to a verdict.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- model input -----------------------------------------------------------

class SyntaxError : public Error {
public:
    SyntaxError(int line, int col, const std::string& what)
        : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + what),
          line(line), col(col) {}
    int line;
    int col;
};

class MissingOrder : public Error {
public:
    explicit MissingOrder(int n)
        : Error("moment orders must be contiguous from 1; order " + std::to_string(n) + " is missing"),
          order(n) {}
    int order;
};

class MomentInfeasible : public Error {
public:
    MomentInfeasible(const std::string& time, int minor_index)
        : Error("moment sequence infeasible at time " + time +
                ": leading principal minor " + std::to_string(minor_index) + " is not positive"),
          time(time), minor_index(minor_index) {}
    std::string time;
    int minor_index;
};

class NotAtOrigin : public Error {
public:
    explicit NotAtOrigin(int n)
        : Error("moment of order " + std::to_string(n) + " does not vanish at time 0"),
          order(n) {}
    int order;
};

class UnknownModel : public Error {
public:
    explicit UnknownModel(const std::string& name)
        : Error("unknown model: " + name) {}
};

class InvalidParameter : public Error {
public:
    explicit InvalidParameter(const std::string& what) : Error(what) {}
};

// --- capacity and hypotheses -------------------------------------------------

class OrderOutOfRange : public Error {
public:
    explicit OrderOutOfRange(const std::string& what) : Error(what) {}
};

class InsufficientMoments : public Error {
public:
    explicit InsufficientMoments(const std::string& what) : Error(what) {}
};

class TimeOrderViolation : public Error {
public:
    explicit TimeOrderViolation(const std::string& what) : Error(what) {}
};

class NonPolynomialTime : public Error {
public:
    explicit NonPolynomialTime(const std::string& what) : Error(what) {}
};

class HypothesisViolated : public Error {
public:
    explicit HypothesisViolated(const std::string& what) : Error(what) {}
};

class DegenerateTriple : public Error {
public:
    explicit DegenerateTriple(const std::string& what) : Error(what) {}
};

class CertificationFailed : public Error {
public:
    CertificationFailed(int order, const std::string& residual)
        : Error("family member " + std::to_string(order) +
                " is not a martingale; residual " + residual),
          order(order), residual(residual) {}
    int order;
    std::string residual;
};

class NotConstant : public Error {
public:
    NotConstant(int order, const std::string& coefficient)
        : Error("recombination coefficient at order " + std::to_string(order) +
                " is time dependent: " + coefficient),
          order(order), coefficient(coefficient) {}
    int order;
    std::string coefficient;
};

// --- algebra ----------------------------------------------------------------

class DivisionByZeroFunction : public Error {
public:
    DivisionByZeroFunction() : Error("division by the zero rational function") {}
};

class SingularSystem : public Error {
public:
    explicit SingularSystem(const std::string& what) : Error(what) {}
};

class DegenerateAtPoint : public Error {
public:
    explicit DegenerateAtPoint(const std::string& what) : Error(what) {}
};

// --- simulation ---------------------------------------------------------------

class DegenerateVariance : public Error {
public:
    explicit DegenerateVariance(const std::string& what) : Error(what) {}
};

class InvalidGrid : public Error {
public:
    explicit InvalidGrid(const std::string& what) : Error(what) {}
};

class GridMismatch : public Error {
public:
    explicit GridMismatch(const std::string& what) : Error(what) {}
};

} // namespace polymart
