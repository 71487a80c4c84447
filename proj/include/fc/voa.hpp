#ifndef FC_VOA_HPP
#define FC_VOA_HPP

#include "fc/ratfunc.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fc {

// a(-n_1)...a(-n_k)|0> with n_1 >= ... >= n_k >= 1
using FockLabel = std::vector<int>;

int weight(const FockLabel& l);
// prod_n n^{m_n} m_n!  (norm of the monomial under the lambda = 1, sign-free pairing)
Scalar label_norm(const FockLabel& l);
std::string label_str(const FockLabel& l);

struct GradedVector {
    std::map<FockLabel, Scalar> c;

    GradedVector() = default;
    static GradedVector vacuum();
    static GradedVector basis(const FockLabel& l, const Scalar& s = 1);

    bool is_zero() const { return c.empty(); }
    int max_weight() const;
    bool homogeneous(int* w = nullptr) const;
    GradedVector component(int w) const;
    void add(const FockLabel& l, const Scalar& s);

    GradedVector& operator+=(const GradedVector& o);
    GradedVector& operator-=(const GradedVector& o);
    bool operator==(const GradedVector& o) const { return c == o.c; }
    bool operator!=(const GradedVector& o) const { return c != o.c; }
    std::string str() const;
};

GradedVector operator+(GradedVector a, const GradedVector& b);
GradedVector operator-(GradedVector a, const GradedVector& b);
GradedVector operator*(GradedVector a, const Scalar& s);

// functional on V: value on each basis monomial
struct DualVector {
    std::map<FockLabel, Scalar> c;

    static DualVector of(const FockLabel& l, const Scalar& s = 1);
    Scalar pair(const GradedVector& v) const;
    bool is_zero() const { return c.empty(); }
    void add(const FockLabel& l, const Scalar& s);
    DualVector& operator+=(const DualVector& o);
    bool operator==(const DualVector& o) const { return c == o.c; }
    std::string str() const;
};

DualVector operator*(DualVector a, const Scalar& s);

struct VoaContext {
    int nmax = 6;
    int lmax = 4;
    Scalar lambda = 1;
    Scalar central_charge = 1;

    void validate() const;
};

// counts vector components discarded because they landed above nmax
struct Truncation {
    long dropped = 0;
};
// components dropped by every mode action since start, across threads
long truncation_total();

std::vector<FockLabel> partitions(int n);
std::vector<FockLabel> basis(const VoaContext& ctx, int level);

// the Heisenberg mode a(k) on the Fock space
GradedVector heis(int k, const GradedVector& u);

GradedVector mode_action(const VoaContext& ctx, const GradedVector& v, int n, const GradedVector& u,
                         Truncation* tr = nullptr);
GradedVector virasoro(const VoaContext& ctx, int n, const GradedVector& u, Truncation* tr = nullptr);
GradedVector conformal_vector();

// w' o op on the weight range [0, nmax]
DualVector dual_compose(const VoaContext& ctx, const DualVector& w,
                        const std::function<GradedVector(const GradedVector&)>& op);
// w' o L(-1)^j / j! summed: coefficients of zeta^j in w' o exp(zeta L(-1))
std::vector<DualVector> dual_translation(const VoaContext& ctx, const DualVector& w);

Scalar bilinear_form(const VoaContext& ctx, const GradedVector& a, const GradedVector& b);
// the same form with lambda kept symbolic: a rational function of the lambda variable
RatFunc bilinear_form_symbolic(const GradedVector& a, const GradedVector& b);

std::vector<std::pair<GradedVector, GradedVector>> dual_basis(const VoaContext& ctx, int level);
// dual vectors for an arbitrary basis of one level via Gram inversion
std::vector<GradedVector> dual_basis_of(const VoaContext& ctx, const std::vector<GradedVector>& b);

struct CoordChange {
    std::vector<Scalar> a;     // a[k] for k = 1..order, a[0] unused
    std::vector<Scalar> beta;  // beta[0..order-1]
    int order = 0;
};

// rho(z) = exp(sum_{k>=1} beta_k z^{k+1} d/dz) beta_0^{z d/dz} z
CoordChange solve_exp_coeffs(const std::vector<Scalar>& a, int order);
std::vector<Scalar> exp_series(const std::vector<Scalar>& beta, int order);
std::vector<Scalar> compose_series(const std::vector<Scalar>& f, const std::vector<Scalar>& g, int order);
// exp(sum_{m>0} (m+1) beta_m L(m)) beta_0^{L(0)}
GradedVector apply_Pf(const VoaContext& ctx, const CoordChange& f, const GradedVector& u);
// beta_0^{L(0)} exp(sum_{m>0} beta_m L(m)): satisfies P(f1 o f2) = P(f1) P(f2)
GradedVector apply_Pf_rep(const VoaContext& ctx, const CoordChange& f, const GradedVector& u);

struct CommutatorReport {
    bool ok = true;
    std::string detail;
};

// [beta, Y(v,z)] against sum_m (1/(m+1)!) beta^{(m+1)}(z) Y(L(m)v, z) with beta = -sum beta_n L(n);
// sign = +1 is the form with a plus sign in front of the sum
CommutatorReport check_commutator_formula(const VoaContext& ctx, const std::map<int, Scalar>& beta,
                                          const GradedVector& v,
                                          const std::vector<std::pair<FockLabel, FockLabel>>& samples,
                                          int sign = +1);

GradedVector parse_state(const std::string& s);
DualVector parse_dual(const std::string& s);

}  // namespace fc

#endif
