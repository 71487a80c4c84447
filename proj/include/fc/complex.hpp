#ifndef FC_COMPLEX_HPP
#define FC_COMPLEX_HPP

#include "fc/eprod.hpp"

#include <memory>
#include <optional>

namespace fc {

// group signs of the coboundary: front * s.front, middle i * (-1)^i s.middle,
// back * (-1)^{n+1} s.back
struct DeltaSigns {
    Scalar front = 1, middle = 1, back = 1;
};

struct Node;
using NodeP = std::shared_ptr<const Node>;

// cochain bodies as expression trees over E-elements
struct Node {
    enum Kind { E, FN, LIN, DELTA, DELTA_EX, PRODUCT } kind = E;
    int arity = 0;
    Correlator corr;                                    // E
    Evaluator fn;                                       // FN
    std::vector<std::pair<Scalar, NodeP>> terms;        // LIN
    NodeP a, b;                                         // DELTA, DELTA_EX use a; PRODUCT uses both
    DeltaSigns signs;                                   // DELTA
    bool printed_ex_sign = false;                       // DELTA_EX: back term with + as displayed
    std::vector<int> slots_a, slots_b;                  // PRODUCT: argument positions of each factor
};

// product terms keep their two factors until paired with a dual
struct PTerm {
    Scalar c;
    EVal a, b;
};
struct CVal {
    EVal e;
    std::vector<PTerm> p;
};

// value on clustered arguments, with extra operators in front of the output
// and next to the generating state
CVal node_value(const NodeP& n, const std::vector<Arg>& args, const Arg& front = {}, const Arg& back = {});
// products go through the eps-product; plain parts land in eps^0
EpsSeries pair_value(const DualVector& wp, const CVal& v, const VoaContext& ctx);
bool has_product(const NodeP& n);

struct Cochain {
    NodeP body;
    int n = 0, m = 0;
    int r = 0, t = 0;  // product metadata
    bool certified = false;
    std::string cert_detail;
};

struct CertOptions {
    std::vector<GradedVector> states;  // cycled over the insertion slots
    std::vector<DualVector> duals;
    bool strict = true;  // throw on a failed certificate
};
CertOptions default_cert_options();

NodeP e_node(const Correlator& c);
NodeP fn_node(const Evaluator& f, int arity);
NodeP lin_node(std::vector<std::pair<Scalar, NodeP>> terms);
NodeP delta_node(const NodeP& a, const DeltaSigns& s = {});
NodeP delta_ex_node(const NodeP& a, bool printed_sign = false);
NodeP product_node(const NodeP& a, const NodeP& b, std::vector<int> slots_a, std::vector<int> slots_b);

// validated against composability I/J for every budget <= m and the pole bounds
Cochain cochain_new(const NodeP& body, int n, int m, const VoaContext& ctx, const CertOptions& opt = default_cert_options());
Cochain cochain_new(const Correlator& body, int n, int m, const VoaContext& ctx,
                    const CertOptions& opt = default_cert_options());

// C^n_m -> C^{n+1}_{m-1}
Cochain delta(const Cochain& phi, const DeltaSigns& s = {});

// G1, G2 pieces of the exceptional coboundary on a fixed sample
struct ExceptionalCochain {
    Cochain c;
    RatFunc g1, g2;
    bool certified = false;
    std::string detail;
};
ExceptionalCochain check_exceptional(const Cochain& phi, const InsertionSpec& ins, const DualVector& wp,
                                     const VoaContext& ctx, bool printed_sign = false);
Cochain delta_ex(const ExceptionalCochain& phi, bool printed_sign = false);

// evaluation at positioned insertions, one cluster per argument
EpsSeries evaluate(const Cochain& c, const DualVector& wp, const InsertionSpec& ins, const VoaContext& ctx);

// first k slots to Phi; the last r of them shared with Psi
Cochain cochain_product(const Cochain& phi, const Cochain& psi, int r, int t, const VoaContext& ctx,
                        bool strict = false);
// Phi.Psi - Psi.Phi with positional arguments
Cochain commutator(const Cochain& phi, const Cochain& psi, int r, int t, const VoaContext& ctx);

// sample family for identity checks: every choice of states at z_1..z_n and every dual
struct Sample {
    DualVector wp;
    InsertionSpec ins;
    std::string id() const;
};
struct SampleSpace {
    std::vector<GradedVector> states;
    std::vector<DualVector> duals;
};
std::vector<Sample> samples(int n, const SampleSpace& sp);

struct IdentityReport {
    bool ok = true;
    int cases = 0;
    std::string detail;  // first failure: sample, eps order, value
};
// every eps-coefficient of c vanishes on the samples
IdentityReport check_vanishing(const Cochain& c, const SampleSpace& sp, const VoaContext& ctx);
IdentityReport check_equal(const Cochain& a, const Cochain& b, const SampleSpace& sp, const VoaContext& ctx);

struct LeibnizReport {
    IdentityReport id;
    std::pair<int, int> lhs_bidegree, rhs_bidegree;
};
// delta(Phi._eps Psi) against (delta Phi)._eps Psi + (-1)^k Phi._eps (delta Psi)
LeibnizReport leibniz_check(const Cochain& phi, const Cochain& psi, const SampleSpace& sp, const VoaContext& ctx);

// Phi . delta Psi vanishes under the commutator product
IdentityReport orthogonality_check(const Cochain& phi, const Cochain& psi, const SampleSpace& sp,
                                   const VoaContext& ctx);

struct Witness {
    std::string sample;
    int order = 0;
    std::string point;
    std::string value;
};
struct ClassRep {
    Cochain rep;
    IdentityReport closed;
    std::optional<Witness> witness;
    std::string status;  // "nonvanishing" or "vanishing at truncation"
};
// [(delta Phi) . Phi] for Phi in C^1_2; witnesses at the points z = (2, 3) and (5, 7)
ClassRep gv_class(const Cochain& phi, const SampleSpace& sp, const VoaContext& ctx);

struct CohomologyReport {
    bool closed = false;
    std::optional<std::vector<Scalar>> exact_witness;  // coefficients over the generator list
    std::string fingerprint;                           // class modulo the exact span on the samples
};
// generators: E-element cochains of arity n-1 with states of weight <= n_gen
CohomologyReport cohomology_predicates(const Cochain& phi, const SampleSpace& sp, const VoaContext& ctx,
                                       int n_gen = 2);

// local coordinate change rho(z) = z + a2 z^2 at every insertion: states
// through P(f) (printed form, or the representation form when rep is set) and
// dz^wt tags through beta_0^{-wt}; correlator and product values must not move
CheckReport coordinate_canonicity(const ProductInput& in, const DualVector& wp, const Scalar& a2, bool rep,
                                  const VoaContext& ctx);

}  // namespace fc

#endif
