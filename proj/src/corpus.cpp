#include "qgrad/corpus.hpp"

#include <cmath>
#include <sstream>

#include "qgrad/errors.hpp"

namespace qgrad {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(item);
    return parts;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ParameterError("malformed number '" + s + "'");
    return v;
}

Matrix zero_matrix(int d) { return Matrix(d, std::vector<double>(d, 0.0)); }

FunctionOracle make_zero(int d) {
    OracleMetadata meta;
    meta.gradient0 = std::vector<double>(d, 0.0);
    meta.hessian0 = zero_matrix(d);
    meta.radius = 1.0;
    meta.kappa = 0.0;
    meta.gradient_bound = 0.25;
    meta.hessian_bound = 0.25;
    meta.gevrey_c = 1.0;
    meta.deriv_bound = 0.0;
    return FunctionOracle(d, [](std::span<const Complex>) { return Complex{0.0, 0.0}; }, meta);
}

FunctionOracle make_poly_d2() {
    // f(x,y) = 0.3x - 0.2y + 0.15x^2 + 0.4xy - 0.25y^2 + 0.1x^3 y + 0.05y^4
    OracleMetadata meta;
    meta.gradient0 = std::vector<double>{0.3, -0.2};
    meta.hessian0 = Matrix{{0.3, 0.4}, {0.4, -0.5}};
    meta.radius = 1.0;
    meta.kappa = 8.0;
    meta.gradient_bound = 1.0 / 3.0;
    meta.hessian_bound = 0.5;
    meta.gevrey_c = 1.0;
    meta.deriv_bound = 2.0;
    return FunctionOracle(
        2,
        [](std::span<const Complex> z) {
            const Complex x = z[0], y = z[1];
            return 0.3 * x - 0.2 * y + 0.15 * x * x + 0.4 * x * y - 0.25 * y * y +
                   0.1 * x * x * x * y + 0.05 * y * y * y * y;
        },
        meta);
}

FunctionOracle make_quartic_d3() {
    // f = (1/2) x^T A x + small quartic tail; Hessian at 0 is A.
    static const Matrix A{{0.4, -0.25, 0.1}, {-0.25, 0.3, 0.05}, {0.1, 0.05, -0.2}};
    OracleMetadata meta;
    meta.gradient0 = std::vector<double>{0.0, 0.0, 0.0};
    meta.hessian0 = A;
    meta.radius = 1.0;
    meta.kappa = 2.0;
    meta.gradient_bound = 0.5;
    meta.hessian_bound = 0.5;
    meta.gevrey_c = 1.0;
    meta.deriv_bound = 1.0;
    return FunctionOracle(
        3,
        [](std::span<const Complex> z) {
            Complex quad{0.0, 0.0};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) quad += A[i][j] * z[i] * z[j];
            const Complex q4 = 0.05 * (z[0] * z[0] * z[0] * z[0] + z[1] * z[1] * z[1] * z[1] +
                                       z[2] * z[2] * z[2] * z[2]) +
                               0.04 * z[0] * z[0] * z[1] * z[1] + 0.03 * z[1] * z[1] * z[2] * z[2];
            return 0.5 * quad + q4;
        },
        meta);
}

FunctionOracle make_exp_d1() {
    OracleMetadata meta;
    meta.gradient0 = std::vector<double>{1.0};
    meta.hessian0 = Matrix{{1.0}};
    meta.radius = 2.0;
    meta.kappa = 8.0; // exceeds e^2, the modulus bound on the radius-4 circle restricted to |x|<=1/2
    meta.gradient_bound = 1.0;
    meta.hessian_bound = 1.0;
    meta.gevrey_c = 1.0;
    meta.deriv_bound = 3.0;
    return FunctionOracle(1, [](std::span<const Complex> z) { return std::exp(z[0]); }, meta);
}

FunctionOracle make_expquad_d2() {
    // f = exp(0.3x - 0.2y) - 1
    OracleMetadata meta;
    meta.gradient0 = std::vector<double>{0.3, -0.2};
    meta.hessian0 = Matrix{{0.09, -0.06}, {-0.06, 0.04}};
    meta.radius = 2.0;
    meta.kappa = 4.0;
    meta.gradient_bound = 1.0 / 3.0;
    meta.hessian_bound = 0.25;
    meta.gevrey_c = 1.0;
    meta.deriv_bound = 1.0;
    return FunctionOracle(
        2,
        [](std::span<const Complex> z) { return std::exp(0.3 * z[0] - 0.2 * z[1]) - 1.0; },
        meta);
}

} // namespace

FunctionOracle make_linear(std::vector<double> g) {
    if (g.empty()) throw ParameterError("linear form needs at least one slope");
    const int d = static_cast<int>(g.size());
    OracleMetadata meta;
    meta.gradient0 = g;
    meta.hessian0 = zero_matrix(d);
    meta.radius = 1.0;
    double max_abs = 0.0, l1 = 0.0;
    for (double v : g) {
        max_abs = std::max(max_abs, std::fabs(v));
        l1 += std::fabs(v);
    }
    meta.kappa = std::max(0.25, 2.0 * l1);
    meta.gradient_bound = std::max(max_abs, 1.0 / 3.0);
    meta.hessian_bound = 0.25;
    meta.gevrey_c = 1.0;
    meta.deriv_bound = 0.0;
    return FunctionOracle(
        d,
        [coeffs = std::move(g)](std::span<const Complex> z) {
            Complex acc{0.0, 0.0};
            for (std::size_t i = 0; i < z.size(); ++i) acc += coeffs[i] * z[i];
            return acc;
        },
        meta);
}

FunctionOracle make_quadratic_form(Matrix form) {
    const int d = static_cast<int>(form.size());
    if (d == 0) throw ParameterError("quadratic form needs a nonempty matrix");
    for (const auto& row : form)
        if (static_cast<int>(row.size()) != d) throw ParameterError("quadratic form matrix must be square");
    Matrix hess = zero_matrix(d);
    double max_entry = 0.0, total = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            hess[i][j] = form[i][j] + form[j][i];
            max_entry = std::max(max_entry, std::fabs(hess[i][j]));
            total += std::fabs(form[i][j]);
        }
    OracleMetadata meta;
    meta.gradient0 = std::vector<double>(d, 0.0);
    meta.hessian0 = hess;
    meta.radius = 1.0;
    meta.kappa = std::max(0.5, 9.0 * total); // |z_j| stays below 3/2 on every sampling circle used
    meta.gradient_bound = std::max(0.25, max_entry);
    meta.hessian_bound = std::max(0.25, max_entry);
    meta.gevrey_c = 1.0;
    meta.deriv_bound = 0.0;
    return FunctionOracle(
        d,
        [m = std::move(form), d](std::span<const Complex> z) {
            Complex acc{0.0, 0.0};
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) acc += m[i][j] * z[i] * z[j];
            return acc;
        },
        meta);
}

FunctionOracle make_fjk(int j, int k, double eps, double c, int d) {
    if (j < 1 || k < 1 || j > d || k > d)
        throw ParameterError("fjk indices must lie in [1, d]");
    if (!(eps > 0.0) || !(c > 0.0)) throw ParameterError("fjk needs positive eps and c");
    OracleMetadata meta;
    meta.gradient0 = std::vector<double>(d, 0.0);
    Matrix hess = zero_matrix(d);
    // Direct differentiation of the closed form: off-diagonal pairs get eps,
    // the j = k diagonal gets 2*eps.
    if (j == k)
        hess[j - 1][j - 1] = 2.0 * eps;
    else
        hess[j - 1][k - 1] = hess[k - 1][j - 1] = eps;
    meta.hessian0 = hess;
    meta.radius = 1.0;
    meta.kappa = 4.0 * eps * std::exp(c * d);
    meta.gradient_bound = std::max(0.25, eps);
    meta.hessian_bound = std::max(0.25, 2.0 * eps);
    meta.gevrey_c = std::max(1.0, c);
    meta.deriv_bound = std::max(1.0, 4.0 * eps * c * c);
    return FunctionOracle(
        d,
        [j, k, eps, c](std::span<const Complex> z) {
            Complex norm2{0.0, 0.0};
            for (const Complex& zi : z) norm2 += zi * zi;
            return eps * z[j - 1] * z[k - 1] * std::exp(-0.5 * c * norm2);
        },
        meta);
}

FunctionOracle make_exp_pole() {
    static constexpr double kPole = 2.1;
    OracleMetadata meta;
    meta.gradient0 = std::vector<double>{1.0 + 1.0 / kPole};
    meta.hessian0 = Matrix{{1.0 + 2.0 / kPole + 2.0 / (kPole * kPole)}};
    meta.radius = kPole;
    meta.kappa = 160.0; // max modulus on the radius-2 circle is e^2 * 21 ~ 155.2
    meta.gradient_bound = 1.5;
    meta.hessian_bound = 2.5;
    return FunctionOracle(
        1,
        [](std::span<const Complex> z) { return std::exp(z[0]) / (1.0 - z[0] / kPole); },
        meta);
}

std::vector<std::vector<int>> sparse_demo_residues() {
    // Symmetric, at most 2 nonzero residues per row and column, values mod 7.
    std::vector<std::vector<int>> L(8, std::vector<int>(8, 0));
    auto set = [&](int i, int j, int v) { L[i][j] = v; L[j][i] = v; };
    set(0, 0, 1);
    set(0, 1, 3);
    set(2, 2, 2);
    set(2, 3, -2);
    set(4, 4, -1);
    set(4, 5, 1);
    set(6, 6, -3);
    set(6, 7, 2);
    return L;
}

namespace {

FunctionOracle make_sparse_demo() {
    const auto L = sparse_demo_residues();
    Matrix form(8, std::vector<double>(8, 0.0));
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) form[i][j] = L[i][j] / 7.0;
    FunctionOracle oracle = make_quadratic_form(form);
    return oracle;
}

} // namespace

std::vector<CorpusEntry> corpus() {
    std::vector<CorpusEntry> entries;
    entries.push_back({"linear_d3", make_linear({13.0 / 128.0, -9.0 / 128.0, 5.0 / 128.0})});
    entries.push_back({"zero_d2", make_zero(2)});
    entries.push_back({"quad_d2", make_quadratic_form({{0.0, 1.0}, {1.0, 0.0}})});
    entries.push_back({"quad_boolean_d4", make_quadratic_form({{0.0, 1.0, 0.0, 1.0},
                                                               {1.0, 0.0, 1.0, 0.0},
                                                               {0.0, 1.0, 0.0, 0.0},
                                                               {1.0, 0.0, 0.0, 0.0}})});
    entries.push_back({"quad_sparse_d8_q7", make_sparse_demo()});
    entries.push_back({"poly_d2", make_poly_d2()});
    entries.push_back({"quartic_d3", make_quartic_d3()});
    entries.push_back({"exp_d1", make_exp_d1()});
    entries.push_back({"exp_pole_d1", make_exp_pole()});
    entries.push_back({"expquad_d2", make_expquad_d2()});
    entries.push_back({"fjk_d2", make_fjk(1, 2, 0.1, 1.0, 2)});
    entries.push_back({"gevrey_d2", make_fjk(1, 2, 1.0, 1.0, 2)});
    return entries;
}

CorpusEntry corpus_lookup(const std::string& spec_string) {
    const auto parts = split(spec_string, ':');
    const std::string& name = parts.front();
    if (name == "fjk" && parts.size() >= 2) {
        const auto jk = split(parts[1], ',');
        if (jk.size() != 2) throw ParameterError("fjk wants j,k indices, e.g. fjk:1,2:0.1:1");
        const int j = std::stoi(jk[0]);
        const int k = std::stoi(jk[1]);
        const double eps = parts.size() > 2 ? parse_double(parts[2]) : 0.1;
        const double c = parts.size() > 3 ? parse_double(parts[3]) : 1.0;
        const int d = parts.size() > 4 ? std::stoi(parts[4]) : std::max(j, k);
        return {spec_string, make_fjk(j, k, eps, c, d)};
    }
    if (name == "linear" && parts.size() == 2) {
        std::vector<double> g;
        for (const auto& item : split(parts[1], ',')) g.push_back(parse_double(item));
        return {spec_string, make_linear(std::move(g))};
    }
    if (parts.size() == 1) {
        for (auto& entry : corpus())
            if (entry.name == name) return entry;
    }
    throw ParameterError("unknown corpus function '" + spec_string + "'");
}

} // namespace qgrad
