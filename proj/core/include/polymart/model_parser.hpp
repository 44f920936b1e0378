#pragma once

#include <string>

#include "polymart/moment_model.hpp"

namespace polymart {

// Model file format, one assignment per line:
//
//   # moments of a standard Wiener process
//   model "wiener"
//   g[1] = 0
//   g[2] = t
//   g[3] = 0
//   g[4] = 3*t^2
//
// Expressions are polynomials in t built from integer and p/q literals with
// + - * ^ and parentheses. Orders must be contiguous from 1; the header line
// is optional. Parsing validates the resulting model (origin condition and
// Hankel feasibility on the default grid).
MomentModel parse_model(const std::string& text);

// Canonical text for a model with polynomial moment functions; throws
// NonPolynomialTime otherwise. parse_model(serialize_model(m)) == m.
std::string serialize_model(const MomentModel& model);

} // namespace polymart
