#ifndef FC_RATFUNC_HPP
#define FC_RATFUNC_HPP

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fc {

using Scalar = mpq_class;

// a/b in lowest terms (the two-argument mpq constructor does not reduce)
inline Scalar frac(long a, long b)
{
    Scalar q(a, b);
    q.canonicalize();
    return q;
}

// Variable layout: z1..z20, zeta1, zeta2, eps, lambda, one scratch slot
// used internally by the Laurent expander, and tau for scaling expansions.
constexpr int NZ = 20;
constexpr int ZETA1 = 20;
constexpr int ZETA2 = 21;
constexpr int EPS = 22;
constexpr int LAMBDA = 23;
constexpr int SCRATCH = 24;
constexpr int TAU = 25;
constexpr int NV = 26;

inline int zv(int i) { return i - 1; }  // z_i, 1-based
std::string var_name(int v);
int var_index(const std::string& name);  // -1 when unknown

struct MathError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Mono {
    std::array<uint16_t, 32> e{};  // padded past NV for vectorized compares
    int deg() const;
    bool operator==(const Mono& o) const { return e == o.e; }
};

// graded lexicographic; lambda is the largest variable, z1 the smallest
struct GrlexLess {
    bool operator()(const Mono& a, const Mono& b) const;
};

class MPoly {
public:
    std::map<Mono, Scalar, GrlexLess> t;

    MPoly() = default;
    MPoly(const Scalar& c);
    MPoly(long c) : MPoly(Scalar(c)) {}
    static MPoly var(int v, unsigned e = 1);
    static MPoly mono(const Mono& m, const Scalar& c);

    bool is_zero() const { return t.empty(); }
    bool is_const() const;
    Scalar const_value() const;
    const Mono& lm() const { return t.rbegin()->first; }
    const Scalar& lc() const { return t.rbegin()->second; }
    int degree() const;
    int degree_in(int v) const;
    int min_degree_in(int v) const;
    bool has_var(int v) const { return degree_in(v) > 0; }
    int main_var() const;  // highest index variable present, -1 if constant
    size_t size() const { return t.size(); }

    void add_term(const Mono& m, const Scalar& c);
    MPoly monic() const;

    // coefficients of v^k, k = 0..deg
    std::vector<MPoly> coeffs_in(int v) const;
    static MPoly from_coeffs(const std::vector<MPoly>& c, int v);

    MPoly& operator+=(const MPoly& o);
    MPoly& operator-=(const MPoly& o);
    MPoly& operator*=(const Scalar& c);

    bool operator==(const MPoly& o) const { return t == o.t; }
    bool operator!=(const MPoly& o) const { return !(t == o.t); }
    bool operator<(const MPoly& o) const;

    std::string str() const;
};

MPoly operator+(MPoly a, const MPoly& b);
MPoly operator-(MPoly a, const MPoly& b);
MPoly operator-(const MPoly& a);
MPoly operator*(const MPoly& a, const MPoly& b);
MPoly operator*(MPoly a, const Scalar& c);
MPoly pow(const MPoly& a, unsigned e);

// q = a / b when b divides a exactly
bool div_exact(const MPoly& a, const MPoly& b, MPoly* q);
MPoly gcd(const MPoly& a, const MPoly& b);
MPoly derivative(const MPoly& a, int v);
// substitute polynomial values for variables (absent keys stay)
MPoly subst(const MPoly& a, const std::map<int, MPoly>& b);

class RatFunc {
public:
    MPoly num;
    MPoly den{Scalar(1)};
    // when set, den is exactly the product of these monic degree-one factors
    bool factored = true;
    std::vector<std::pair<MPoly, int>> dfac;

    RatFunc() = default;
    RatFunc(const Scalar& c) : num(c) {}
    RatFunc(long c) : num(Scalar(c)) {}
    explicit RatFunc(const MPoly& p) : num(p) {}
    static RatFunc var(int v) { return RatFunc(MPoly::var(v)); }

    bool is_zero() const { return num.is_zero(); }
    bool is_poly() const { return den.is_const(); }

    bool operator==(const RatFunc& o) const { return num == o.num && den == o.den; }
    bool operator!=(const RatFunc& o) const { return !(*this == o); }

    std::string str() const;
};

RatFunc normalize(const MPoly& num, const MPoly& den);
// num / prod f^e with the f linear; cancels by trial division
RatFunc from_linear_factors(MPoly num, std::vector<std::pair<MPoly, int>> fac);

RatFunc operator+(const RatFunc& a, const RatFunc& b);
RatFunc operator-(const RatFunc& a, const RatFunc& b);
RatFunc operator-(const RatFunc& a);
RatFunc operator*(const RatFunc& a, const RatFunc& b);
RatFunc operator/(const RatFunc& a, const RatFunc& b);
RatFunc operator*(const RatFunc& a, const Scalar& c);
RatFunc& operator+=(RatFunc& a, const RatFunc& b);
// one common denominator for the whole list
RatFunc sum(const std::vector<RatFunc>& fs);
RatFunc pow(const RatFunc& a, int e);
RatFunc derivative(const RatFunc& f, int v);

RatFunc substitute(const RatFunc& f, const std::map<int, RatFunc>& b);

// multiplicity of the irreducible linear divisor d in den minus in num, floored at 0
int pole_order(const RatFunc& f, const MPoly& d);
// denominator factors with multiplicity; a non-factored den comes back whole
std::vector<std::pair<MPoly, int>> den_factors(const RatFunc& f);

// Laurent expansion about var = 0, or about (var - other) = 0 when other >= 0
struct LaurentExpansion {
    int var = -1;
    int other = -1;
    int lowest = 0;
    int K = 0;
    std::vector<RatFunc> coeffs;  // orders lowest..K
    const RatFunc& at(int order) const;
    RatFunc reconstruct() const;
};
LaurentExpansion laurent_expand(const RatFunc& f, int var, int K, int other = -1);

class EpsSeries {
public:
    std::map<int, RatFunc> c;
    int lmax = 0;

    EpsSeries() = default;
    explicit EpsSeries(int L) : lmax(L) {}
    static EpsSeries constant(const RatFunc& f, int L);

    const RatFunc& coeff(int l) const;
    void add_to(int l, const RatFunc& f);
    bool is_zero() const;
    EpsSeries truncate(int L) const;
    bool operator==(const EpsSeries& o) const;
    bool operator!=(const EpsSeries& o) const { return !(*this == o); }
    std::string str() const;
};

EpsSeries operator+(const EpsSeries& a, const EpsSeries& b);
EpsSeries operator-(const EpsSeries& a, const EpsSeries& b);
EpsSeries operator*(const EpsSeries& a, const EpsSeries& b);
EpsSeries operator*(const EpsSeries& a, const Scalar& s);

// sum of coefficient times products of powers of linear forms;
// exponents may be negative
struct LinProd {
    std::vector<MPoly> atoms;
    std::map<std::vector<int16_t>, Scalar> terms;

    void add(const std::vector<int16_t>& e, const Scalar& c);
    RatFunc to_ratfunc() const;
};

RatFunc parse_ratfunc(const std::string& s);
Scalar parse_scalar(const std::string& s);
std::string scalar_str(const Scalar& s);

}  // namespace fc

#endif
