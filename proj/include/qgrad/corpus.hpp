#pragma once

#include <string>
#include <vector>

#include "qgrad/oracle.hpp"

namespace qgrad {

/// Named test function with exact, hand-derived ground truth in its metadata.
struct CorpusEntry {
    std::string name;
    FunctionOracle oracle;
};

/// The fixed members: linear forms with lattice-exact slopes, quadratic forms
/// (dense, sparse, Boolean), low-degree polynomials, exp composites with
/// declared (r, kappa), and the x_j x_k exp(-c|x|^2/2) family.
std::vector<CorpusEntry> corpus();

/// Resolves "name" or "name:params" strings, e.g. "poly_d2",
/// "fjk:1,2:0.1:1" (j,k,eps,c with optional trailing :d) or
/// "linear:0.5,-0.25". Throws ParameterError for unknown names.
CorpusEntry corpus_lookup(const std::string& spec_string);

// Builders shared by the corpus, tests and the CLI.
FunctionOracle make_linear(std::vector<double> g);
/// f(x) = x^T H x for the given form matrix; the Hessian at 0 is H + H^T.
FunctionOracle make_quadratic_form(Matrix form);
FunctionOracle make_fjk(int j, int k, double eps, double c, int d);
/// e^z / (1 - z/2.1): coefficient decay saturates just outside radius 2, so
/// circle-sampling errors track the geometric rate instead of collapsing
/// factorially the way an entire function's do.
FunctionOracle make_exp_pole();

/// The fixed 8x8 symmetric 2-sparse form matrix with entries k/7 used by the
/// sparse-recovery examples; returned as integer residues L with H = L/7.
std::vector<std::vector<int>> sparse_demo_residues();

} // namespace qgrad
