#ifndef FC_WSPACE_HPP
#define FC_WSPACE_HPP

#include "fc/voa.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fc {

// a state inserted at a position; positions are linear forms in the variables
struct Insertion {
    GradedVector v;
    MPoly pos;
};

// <w', Y(v_1, p_1) ... Y(v_n, p_n) w> by Wick contraction, as a sum of
// products of powers of the forms p_i - p_j and p_i
LinProd correlator_lp(const DualVector& wp, const std::vector<Insertion>& ins, const GradedVector& w);
RatFunc correlator(const DualVector& wp, const std::vector<Insertion>& ins, const GradedVector& w);

using VecRF = std::map<FockLabel, RatFunc>;

// sum_lambda <lambda', Y(v_1,p_1)...w> |lambda> over labels of weight q
VecRF project_weight(const std::vector<Insertion>& ins, const GradedVector& w, int q);

// (v, variable index) pairs
using InsertionSpec = std::vector<std::pair<GradedVector, int>>;

std::vector<Insertion> positioned(const InsertionSpec& ins);

// E^{(n)}(v_1, z_1; ...; v_n, z_n; w), optionally with permuted arguments:
// evaluation at (x_1..x_n) is E(x_{perm[0]}, ..., x_{perm[n-1]})
struct Correlator {
    GradedVector w;
    int n = 0;
    std::vector<int> perm;

    static Correlator e_element(const GradedVector& w, int n);
    std::string desc() const;
};

// "E[<state>; n]"
Correlator parse_correlator(const std::string& s);

RatFunc evaluate(const Correlator& phi, const DualVector& wp, const InsertionSpec& ins);
RatFunc evaluate_at(const Correlator& phi, const DualVector& wp, const std::vector<Insertion>& ins);
VecRF project(const Correlator& phi, const InsertionSpec& ins, int q, const VoaContext& ctx);

// sigma given as images sigma[0..n-1] of 0..n-1
Correlator sigma_act(const std::vector<int>& sigma, const Correlator& phi);
std::vector<int> compose_perm(const std::vector<int>& s, const std::vector<int>& t);  // s o t
std::vector<int> inverse_perm(const std::vector<int>& s);
int perm_sign(const std::vector<int>& s);
// J_{l;s}: permutations increasing on [0,s) and on [s,l)
std::vector<std::vector<int>> shuffles(int l, int s);
// sum over sigma in J_{l;s}^{-1} of sign(sigma) sigma(Phi)
RatFunc shuffle_sum(const Correlator& phi, int s, const DualVector& wp, const InsertionSpec& ins);

struct CheckReport {
    bool ok = true;
    std::string detail;
    void fail(const std::string& d)
    {
        if (ok) detail = d;
        ok = false;
    }
};

// per slot d/dz_i against an L(-1) insertion, and the summed form
// sum_i d/dz_i <w', Phi> = <w' o L(-1), Phi> - <w', Phi(...; L(-1) w)>
CheckReport check_L_minus1(const Correlator& phi, const DualVector& wp, const InsertionSpec& ins);
// <w', t^{L(0)} Phi(v_i, z_i; w)> = <w', Phi(t^{L(0)} v_i, t z_i; t^{L(0)} w)>
CheckReport check_L0(const Correlator& phi, const DualVector& wp, const InsertionSpec& ins, const Scalar& t);

int pole_bound(const GradedVector& a, const GradedVector& b);
// poles only at z_i = z_j (order <= pole_bound) and, when allowed, at z_i = 0
CheckReport check_poles(const RatFunc& f, const InsertionSpec& ins, bool allow_origin);

// tau-expansion of a linear-product sum whose atoms are affine in tau,
// orders up to K
std::map<int, RatFunc> tau_expand(const LinProd& f, int K);

struct ComposabilityResult {
    RatFunc value;
    bool ok = true;
    int certified_order = 0;  // tau orders compared up to this
    std::string detail;
};

// a W-bar valued expression: sum of c * Y(ops) w, each term read as a correlator
struct ETerm {
    Scalar c;
    GradedVector w;
    std::vector<Insertion> ops;
};
using EVal = std::vector<ETerm>;
// identical operator strings collected, zero terms dropped
EVal simplify(const EVal& e);
bool same_value(const EVal& a, const EVal& b);
RatFunc pair(const DualVector& wp, const EVal& e);

// an argument slot holds a cluster of insertions; a cluster of several states
// stands for the re-associated Y(v_i, z_i - z_{i+1}) v_{i+1} at z_{i+1}
using Arg = std::vector<Insertion>;
using Evaluator = std::function<EVal(const std::vector<Arg>&)>;
Evaluator evaluator_of(const Correlator& phi);

// groups l_1..l_n of consecutive insertions, each fed to one slot as
// P_r E(v.., z.. - zeta_g; 1); checked against the tau-expansion of the
// full value at z_k = zeta_g + tau z_k
ComposabilityResult composability_I(const Evaluator& phi, int n, const std::vector<int>& groups,
                                    const InsertionSpec& ins, const std::vector<int>& zeta_vars, const DualVector& wp,
                                    const VoaContext& ctx);
ComposabilityResult composability_I(const Correlator& phi, const std::vector<int>& groups, const InsertionSpec& ins,
                                    const std::vector<int>& zeta_vars, const DualVector& wp, const VoaContext& ctx);
// sum_q E^{(m)}(front; P_q Phi(inner)) against the expansion with inner scaled by tau
ComposabilityResult composability_J(const Evaluator& phi, int n, const InsertionSpec& front,
                                    const InsertionSpec& inner, const DualVector& wp, const VoaContext& ctx);
ComposabilityResult composability_J(const Correlator& phi, const InsertionSpec& front, const InsertionSpec& inner,
                                    const DualVector& wp, const VoaContext& ctx);

}  // namespace fc

#endif
