#ifndef FC_EPROD_HPP
#define FC_EPROD_HPP

#include "fc/wspace.hpp"

#include <functional>

namespace fc {

// x_i = y_j coincidences; merged keeps every x and the unmatched y
struct ExclusionMap {
    std::vector<std::pair<int, int>> pairs;  // (i, j) positions in xs, ys
    std::vector<int> merged;
    int r() const { return int(pairs.size()); }
};

ExclusionMap merge_params(const std::vector<int>& xs, const std::vector<int>& ys);

// (u, u-bar) pairs spanning one weight level
using LevelBasis = std::function<std::vector<std::pair<GradedVector, GradedVector>>(int level)>;
// random invertible recombination of the partition basis at each level, with Gram duals
LevelBasis remixed_basis(const VoaContext& ctx, unsigned seed);

struct ProductOptions {
    int zeta1 = ZETA1;
    int zeta2 = ZETA2;
    const DualVector* second_dual = nullptr;  // pair the second factor with its own dual
    bool parallel = true;
    LevelBasis basis;  // empty: partition basis and its dual
};

// <w', Y_WV(Phi, zeta) u> = sum_j zeta^j <w' o L(-1)^j/j!, Y(u, -zeta) Phi>
RatFunc sewing_factor(const DualVector& wp, const EVal& phi, const GradedVector& u, int zeta, const VoaContext& ctx);
// sum over the x-variables of d/dx of the sewing factor, through L(-1) actions only
RatFunc sewing_factor_shift(const DualVector& wp, const EVal& phi, const GradedVector& u, int zeta,
                            const VoaContext& ctx);

// sum_{l <= lmax} eps^l sum_u <w', Y_WV(Phi, zeta1) u> <w', Y_WV(Psi, zeta2) u-bar>
EpsSeries eps_product(const EVal& a, const EVal& b, const DualVector& wp, const VoaContext& ctx,
                      const ProductOptions& opt = {});

EVal e_val(const Correlator& phi, const InsertionSpec& ins);

struct ProductInput {
    Correlator phi, psi;
    InsertionSpec x, y;
};

// checks collisions against the declared exclusion when one is given
EpsSeries eps_product(const ProductInput& in, const DualVector& wp, const VoaContext& ctx,
                      const ProductOptions& opt = {}, const ExclusionMap* declared = nullptr);

// zeta_2 -> eps/zeta_1 (or zeta_1 -> eps/zeta_2), re-graded and re-truncated
EpsSeries sew_substitute(const EpsSeries& s, int eliminate);
// eps -> zeta_1 zeta_2, collapsed into the eps^0 slot
EpsSeries unsew(const EpsSeries& s);

// d/d(merged variable s), coefficientwise
EpsSeries partial(const ProductInput& in, int s, const DualVector& wp, const VoaContext& ctx);
// the same derivative as an L(-1) insertion in every factor owning slot s
EpsSeries partial_by_insertion(const ProductInput& in, int s, const DualVector& wp, const VoaContext& ctx);
// sum over all merged slots, through the translation shift of each factor
EpsSeries partial_sum_by_shift(const ProductInput& in, const DualVector& wp, const VoaContext& ctx);

// merged arguments permuted, new[i] = merged[sigma[i]], first k to Phi (r = 0)
EpsSeries sigma_on_product(const std::vector<int>& sigma, const ProductInput& in, const DualVector& wp,
                           const VoaContext& ctx);
EpsSeries product_shuffle_sum(const ProductInput& in, int s, const DualVector& wp, const VoaContext& ctx);

// Phi.Psi = Phi._eps Psi - Psi._eps Phi, factors taking the merged arguments by position
EpsSeries commutator_product(const ProductInput& in, const DualVector& wp, const VoaContext& ctx);

// E(w; first s) . E(w; rest) against the split s2
CheckReport split_independence_check(const GradedVector& w, const InsertionSpec& ins, int s1, int s2,
                                     const DualVector& wp, const VoaContext& ctx);

// poles of every coefficient only at x_i = x_j, y_i = y_j, x_i = y_j (and 0 when allowed),
// orders within wt sums
CheckReport product_pole_scan(const EpsSeries& s, const InsertionSpec& x, const InsertionSpec& y, bool allow_origin);

// t^{L(0)} on states, positions and zetas scaled by t: coefficient l scales by t^{2d - 2l}
// for a dual of weight d
CheckReport check_product_L0(const ProductInput& in, const DualVector& wp, const Scalar& t, const VoaContext& ctx);


}  // namespace fc

#endif
