#include "germlab/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace germlab {

namespace {

Cplx pow_int(Cplx base, int e) {
    Cplx r(1.0, 0.0);
    while (e > 0) {
        if (e & 1) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

}  // namespace

void Polynomial::add_term(Cplx coeff, std::vector<int> exps) {
    require(static_cast<int>(exps.size()) == nvars_, ErrorCode::InputError,
            "Polynomial::add_term: exponent count mismatch");
    for (int e : exps)
        require(e >= 0, ErrorCode::InputError, "Polynomial::add_term: negative exponent");
    terms_.push_back({coeff, std::move(exps)});
    normalize();
}

void Polynomial::normalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.exps < b.exps; });
    std::vector<Term> merged;
    for (auto& t : terms_) {
        if (!merged.empty() && merged.back().exps == t.exps)
            merged.back().coeff += t.coeff;
        else
            merged.push_back(std::move(t));
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const Term& t) { return std::abs(t.coeff) == 0.0; }),
                 merged.end());
    terms_ = std::move(merged);
}

Cplx Polynomial::eval(std::span<const Cplx> z) const {
    require(static_cast<int>(z.size()) == nvars_, ErrorCode::InputError,
            "Polynomial::eval: wrong point dimension");
    Cplx sum(0.0, 0.0);
    for (const Term& t : terms_) {
        Cplx prod = t.coeff;
        for (int v = 0; v < nvars_; ++v) {
            const int e = t.exps[v];
            if (e > 0) prod *= pow_int(z[v], e);
        }
        sum += prod;
    }
    return sum;
}

Polynomial Polynomial::derivative(int var) const {
    require(var >= 0 && var < nvars_, ErrorCode::InputError,
            "Polynomial::derivative: bad variable index");
    Polynomial d(nvars_);
    for (const Term& t : terms_) {
        if (t.exps[var] == 0) continue;
        Term nt = t;
        nt.coeff *= static_cast<double>(t.exps[var]);
        nt.exps[var] -= 1;
        d.terms_.push_back(std::move(nt));
    }
    d.normalize();
    return d;
}

Polynomial Polynomial::substitute_zero(int var) const {
    require(var >= 0 && var < nvars_, ErrorCode::InputError,
            "Polynomial::substitute_zero: bad variable index");
    Polynomial s(nvars_);
    for (const Term& t : terms_)
        if (t.exps[var] == 0) s.terms_.push_back(t);
    s.normalize();
    return s;
}

int Polynomial::total_degree() const {
    int deg = 0;
    for (const Term& t : terms_) {
        int d = 0;
        for (int e : t.exps) d += e;
        deg = std::max(deg, d);
    }
    return deg;
}

double Polynomial::magnitude_at_radius(double r) const {
    double m = 0.0;
    for (const Term& t : terms_) {
        int d = 0;
        for (int e : t.exps) d += e;
        m += std::abs(t.coeff) * std::pow(r, d);
    }
    return m;
}

long long Polynomial::weighted_degree(std::span<const int> weights) const {
    require(static_cast<int>(weights.size()) == nvars_, ErrorCode::InputError,
            "weighted_degree: weight count mismatch");
    long long deg = -1;
    for (const Term& t : terms_) {
        long long d = 0;
        for (int v = 0; v < nvars_; ++v) d += static_cast<long long>(weights[v]) * t.exps[v];
        if (deg < 0)
            deg = d;
        else if (deg != d)
            return -1;
    }
    return deg;
}

bool Polynomial::has_real_coefficients(double tol) const {
    for (const Term& t : terms_)
        if (std::fabs(t.coeff.imag()) > tol) return false;
    return true;
}

std::string Polynomial::to_string(const std::vector<std::string>& var_names) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const Term& t : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << t.coeff.real();
        if (t.coeff.imag() != 0.0) os << (t.coeff.imag() > 0 ? "+" : "") << t.coeff.imag() << "i";
        os << ")";
        for (int v = 0; v < nvars_; ++v) {
            if (t.exps[v] == 0) continue;
            os << "*" << var_names[v];
            if (t.exps[v] > 1) os << "^" << t.exps[v];
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Parser {
    const std::string& text;
    size_t pos = 0;
    const std::vector<std::string>& vars;
    const std::map<std::string, Cplx>& params;

    [[noreturn]] void error(const std::string& msg) const {
        fail(ErrorCode::ParseError,
             "polynomial parse error at offset " + std::to_string(pos) + ": " + msg +
                 " in \"" + text + "\"");
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool peek_is(char c) {
        skip_ws();
        return pos < text.size() && text[pos] == c;
    }

    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    bool at_factor_start() {
        skip_ws();
        if (pos >= text.size()) return false;
        const char c = text[pos];
        return std::isalnum(static_cast<unsigned char>(c)) || c == '(' || c == '.';
    }

    double parse_number() {
        skip_ws();
        const size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        }
        // scientific exponent only when unambiguous
        if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
            size_t p = pos + 1;
            if (p < text.size() && (text[p] == '+' || text[p] == '-')) ++p;
            if (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) {
                pos = p;
                while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
                    ++pos;
            }
        }
        if (pos == start) error("expected number");
        return std::stod(text.substr(start, pos - start));
    }

    int parse_uint() {
        skip_ws();
        const size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) error("expected integer exponent");
        const long v = std::stol(text.substr(start, pos - start));
        if (v < 0 || v > 1000) error("exponent out of range");
        return static_cast<int>(v);
    }

    // Longest match against declared symbols (variables, params, i).
    // Returns matched length, or 0.
    size_t match_symbol(std::string& name) {
        size_t best = 0;
        auto try_name = [&](const std::string& s) {
            if (s.size() > best && text.compare(pos, s.size(), s) == 0) {
                best = s.size();
                name = s;
            }
        };
        for (const auto& v : vars) try_name(v);
        for (const auto& [k, _] : params) try_name(k);
        try_name("i");
        return best;
    }

    Polynomial parse_base() {
        skip_ws();
        if (pos >= text.size()) error("unexpected end of input");
        const char c = text[pos];
        if (c == '(') {
            ++pos;
            Polynomial p = parse_expr();
            if (!consume(')')) error("expected ')'");
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            Polynomial p(static_cast<int>(vars.size()));
            p.add_term(Cplx(parse_number(), 0.0), std::vector<int>(vars.size(), 0));
            return p;
        }
        std::string name;
        const size_t len = match_symbol(name);
        if (len == 0) error(std::string("unknown symbol '") + c + "'");
        pos += len;
        Polynomial p(static_cast<int>(vars.size()));
        if (name == "i" &&
            std::find(vars.begin(), vars.end(), "i") == vars.end() && !params.count("i")) {
            p.add_term(Cplx(0.0, 1.0), std::vector<int>(vars.size(), 0));
            return p;
        }
        const auto vit = std::find(vars.begin(), vars.end(), name);
        if (vit != vars.end()) {
            std::vector<int> exps(vars.size(), 0);
            exps[static_cast<size_t>(vit - vars.begin())] = 1;
            p.add_term(Cplx(1.0, 0.0), std::move(exps));
            return p;
        }
        p.add_term(params.at(name), std::vector<int>(vars.size(), 0));
        return p;
    }

    Polynomial parse_factor() {
        Polynomial base = parse_base();
        if (consume('^')) {
            const int e = parse_uint();
            Polynomial r(static_cast<int>(vars.size()));
            r.add_term(Cplx(1.0, 0.0), std::vector<int>(vars.size(), 0));
            for (int k = 0; k < e; ++k) r = multiply(r, base);
            return r;
        }
        return base;
    }

    Polynomial parse_term() {
        Polynomial p = parse_factor();
        while (true) {
            if (consume('*')) {
                p = multiply(p, parse_factor());
            } else if (at_factor_start()) {  // implicit multiplication
                p = multiply(p, parse_factor());
            } else {
                return p;
            }
        }
    }

    Polynomial parse_expr() {
        double sign = 1.0;
        if (consume('-'))
            sign = -1.0;
        else
            consume('+');
        Polynomial p = scale(parse_term(), sign);
        while (true) {
            skip_ws();
            if (consume('+'))
                p = add(p, parse_term());
            else if (consume('-'))
                p = add(p, scale(parse_term(), -1.0));
            else
                return p;
        }
    }

    static Polynomial multiply(const Polynomial& a, const Polynomial& b) {
        Polynomial r(a.nvars());
        for (const Term& ta : a.terms()) {
            for (const Term& tb : b.terms()) {
                std::vector<int> exps(ta.exps);
                for (size_t v = 0; v < exps.size(); ++v) exps[v] += tb.exps[v];
                r.add_term(ta.coeff * tb.coeff, std::move(exps));
            }
        }
        return r;
    }

    static Polynomial add(const Polynomial& a, const Polynomial& b) {
        Polynomial r = a;
        for (const Term& t : b.terms()) r.add_term(t.coeff, t.exps);
        return r;
    }

    static Polynomial scale(const Polynomial& a, double s) {
        Polynomial r(a.nvars());
        for (const Term& t : a.terms()) r.add_term(t.coeff * s, t.exps);
        return r;
    }
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& variables,
                            const std::map<std::string, Cplx>& params) {
    require(!variables.empty(), ErrorCode::InputError, "parse_polynomial: no variables");
    Parser p{text, 0, variables, params};
    Polynomial result = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.error("trailing input");
    return result;
}

}  // namespace germlab
