#pragma once

// Multivariate polynomials over C with a small expression parser.
// Equations are written over declared variable names ("x^2+y^2+z^3",
// "z1^3+z2^3+z3^4"), support implicit multiplication ("y^7z", "txy^6"),
// the imaginary unit i, and named scalar parameters substituted at parse
// time.

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "germlab/common.hpp"

namespace germlab {

using Cplx = std::complex<double>;

struct Term {
    Cplx coeff;
    std::vector<int> exps;  // one exponent per variable
};

class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    int nvars() const { return nvars_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void add_term(Cplx coeff, std::vector<int> exps);

    Cplx eval(std::span<const Cplx> z) const;

    Polynomial derivative(int var) const;

    // Substitute variable `var` = 0 (terms containing it vanish).
    Polynomial substitute_zero(int var) const;

    // Largest total degree over terms; 0 for the zero polynomial.
    int total_degree() const;

    // Sum over terms of |coeff| * r^deg; a scale for residual tolerances.
    double magnitude_at_radius(double r) const;

    // If every term has the same weighted degree sum_i w_i e_i, returns it;
    // otherwise -1.
    long long weighted_degree(std::span<const int> weights) const;

    bool has_real_coefficients(double tol = 0.0) const;

    std::string to_string(const std::vector<std::string>& var_names) const;

private:
    void normalize();

    int nvars_ = 0;
    std::vector<Term> terms_;
};

// Parse an expression over `variables`; identifiers in `params` are
// replaced by their values. Throws Error(ParseError) on bad input.
Polynomial parse_polynomial(const std::string& text,
                            const std::vector<std::string>& variables,
                            const std::map<std::string, Cplx>& params = {});

}  // namespace germlab
