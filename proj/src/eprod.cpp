#include "fc/eprod.hpp"

#include <exception>
#include <random>

namespace fc {

namespace {

VoaContext wide_ctx(int nmax)
{
    VoaContext c;
    c.nmax = nmax;
    c.lmax = 0;
    return c;
}

int top_weight(const EVal& e)
{
    int t = 0;
    for (auto& x : e) {
        t = std::max(t, x.w.max_weight());
        for (auto& o : x.ops) t = std::max(t, o.v.max_weight());
    }
    return t;
}

int dual_weight(const DualVector& d)
{
    int t = 0;
    for (auto& [l, c] : d.c) t = std::max(t, weight(l));
    return t;
}

// sum_l eps^l sum_{(u, ubar)} f(u, ubar), levels in parallel, merged in level order
EpsSeries level_sum(const VoaContext& ctx, const ProductOptions& opt,
                    const std::function<RatFunc(const GradedVector&, const GradedVector&)>& f)
{
    const int L = ctx.lmax;
    if (L > ctx.nmax) throw MathError("lmax must not exceed nmax");
    std::vector<RatFunc> lev(L + 1);
    std::vector<std::exception_ptr> err(L + 1);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
    for (int l = 0; l <= L; ++l) {
        try {
            auto pairs = opt.basis ? opt.basis(l) : dual_basis(ctx, l);
            std::vector<RatFunc> terms;
            for (auto& [u, ub] : pairs) terms.push_back(f(u, ub));
            lev[l] = sum(terms);
        } catch (...) {
            err[l] = std::current_exception();
        }
    }
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    EpsSeries s(L);
    for (int l = 0; l <= L; ++l) s.add_to(l, lev[l]);
    return s;
}

}  // namespace

ExclusionMap merge_params(const std::vector<int>& xs, const std::vector<int>& ys)
{
    ExclusionMap m;
    m.merged = xs;
    for (size_t j = 0; j < ys.size(); ++j) {
        bool hit = false;
        for (size_t i = 0; i < xs.size(); ++i)
            if (xs[i] == ys[j]) {
                m.pairs.emplace_back(int(i), int(j));
                hit = true;
            }
        if (!hit) m.merged.push_back(ys[j]);
    }
    return m;
}

LevelBasis remixed_basis(const VoaContext& ctx, unsigned seed)
{
    return [ctx, seed](int level) {
        auto labels = basis(ctx, level);
        const size_t n = labels.size();
        std::mt19937 rng(seed + unsigned(level));
        std::uniform_int_distribution<int> d(-2, 2);
        // unit lower times unit upper triangular: always invertible
        std::vector<std::vector<Scalar>> lo(n, std::vector<Scalar>(n, 0)), up = lo;
        for (size_t i = 0; i < n; ++i) {
            lo[i][i] = up[i][i] = 1;
            for (size_t j = 0; j < i; ++j) lo[i][j] = d(rng);
            for (size_t j = i + 1; j < n; ++j) up[i][j] = d(rng);
        }
        std::vector<GradedVector> b(n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                Scalar m = 0;
                for (size_t k = 0; k < n; ++k) m += lo[i][k] * up[k][j];
                if (m != 0) b[i].add(labels[j], m);
            }
        auto dual = dual_basis_of(ctx, b);
        std::vector<std::pair<GradedVector, GradedVector>> out;
        for (size_t i = 0; i < n; ++i) out.emplace_back(b[i], dual[i]);
        return out;
    };
}

RatFunc sewing_factor(const DualVector& wp, const EVal& phi, const GradedVector& u, int zeta, const VoaContext& ctx)
{
    if (u.is_zero()) return RatFunc();
    const Insertion at{u, MPoly::var(zeta) * Scalar(-1)};
    auto tr = dual_translation(ctx, wp);
    std::vector<RatFunc> terms;
    for (size_t j = 0; j < tr.size(); ++j) {
        if (tr[j].is_zero()) continue;
        const RatFunc zj(MPoly::var(zeta, unsigned(j)));
        for (auto& t : phi) {
            std::vector<Insertion> ops{at};
            ops.insert(ops.end(), t.ops.begin(), t.ops.end());
            terms.push_back(correlator(tr[j], ops, t.w) * zj * t.c);
        }
    }
    return sum(terms);
}

RatFunc sewing_factor_shift(const DualVector& wp, const EVal& phi, const GradedVector& u, int zeta,
                            const VoaContext& ctx)
{
    RatFunc r;
    if (u.is_zero()) return r;
    const VoaContext big = wide_ctx(std::max({top_weight(phi), u.max_weight(), dual_weight(wp)}) + 2);
    auto L1 = [&](const GradedVector& x) { return virasoro(big, -1, x); };
    const MPoly pos = MPoly::var(zeta) * Scalar(-1);
    const GradedVector du = L1(u);
    auto tr = dual_translation(ctx, wp);
    for (size_t j = 0; j < tr.size(); ++j) {
        if (tr[j].is_zero()) continue;
        DualVector tl = dual_compose(wide_ctx(dual_weight(tr[j])), tr[j], L1);
        RatFunc s;
        for (auto& t : phi) {
            std::vector<Insertion> ops{{u, pos}}, dops{{du, pos}};
            ops.insert(ops.end(), t.ops.begin(), t.ops.end());
            dops.insert(dops.end(), t.ops.begin(), t.ops.end());
            RatFunc v = correlator(tl, ops, t.w) - correlator(tr[j], ops, L1(t.w)) - correlator(tr[j], dops, t.w);
            s += v * t.c;
        }
        r += s * RatFunc(MPoly::var(zeta, unsigned(j)));
    }
    return r;
}

EpsSeries eps_product(const EVal& a, const EVal& b, const DualVector& wp, const VoaContext& ctx,
                      const ProductOptions& opt)
{
    const DualVector& wp2 = opt.second_dual ? *opt.second_dual : wp;
    return level_sum(ctx, opt, [&](const GradedVector& u, const GradedVector& ub) {
        RatFunc fa = sewing_factor(wp, a, u, opt.zeta1, ctx);
        if (fa.is_zero()) return RatFunc();
        return fa * sewing_factor(wp2, b, ub, opt.zeta2, ctx);
    });
}

EVal e_val(const Correlator& phi, const InsertionSpec& ins)
{
    for (size_t i = 0; i < ins.size(); ++i)
        for (size_t j = i + 1; j < ins.size(); ++j)
            if (ins[i].second == ins[j].second) throw MathError("not in configuration space");
    std::vector<Arg> args;
    for (auto& [v, z] : ins) args.push_back({{v, MPoly::var(z)}});
    return evaluator_of(phi)(args);
}

static std::vector<int> vars_of(const InsertionSpec& s)
{
    std::vector<int> r;
    for (auto& [v, z] : s) r.push_back(z);
    return r;
}

EpsSeries eps_product(const ProductInput& in, const DualVector& wp, const VoaContext& ctx, const ProductOptions& opt,
                      const ExclusionMap* declared)
{
    ExclusionMap m = merge_params(vars_of(in.x), vars_of(in.y));
    if (declared && declared->pairs != m.pairs) throw MathError("undeclared parameter collision");
    for (int z : m.merged)
        if (z == opt.zeta1 || z == opt.zeta2) throw MathError("not in configuration space");
    return eps_product(e_val(in.phi, in.x), e_val(in.psi, in.y), wp, ctx, opt);
}

EpsSeries sew_substitute(const EpsSeries& s, int eliminate)
{
    if (eliminate != ZETA1 && eliminate != ZETA2) throw MathError("sewing eliminates zeta1 or zeta2");
    const int keep = eliminate == ZETA1 ? ZETA2 : ZETA1;
    const RatFunc sub = RatFunc::var(EPS) / RatFunc::var(keep);
    EpsSeries r(s.lmax);
    for (auto& [l, f] : s.c) {
        RatFunc g = substitute(f, {{eliminate, sub}});
        auto ex = laurent_expand(g, EPS, s.lmax - l);
        for (int k = ex.lowest; k <= s.lmax - l; ++k) {
            const RatFunc& c = ex.at(k);
            if (c.is_zero()) continue;
            if (l + k < 0) throw MathError("negative eps power after sewing");
            r.add_to(l + k, c);
        }
    }
    return r;
}

EpsSeries unsew(const EpsSeries& s)
{
    EpsSeries r(s.lmax);
    const RatFunc zz = RatFunc::var(ZETA1) * RatFunc::var(ZETA2);
    for (auto& [l, f] : s.c) r.add_to(0, substitute(f, {{EPS, zz}}) * pow(zz, l));
    return r;
}

static int merged_var(const ProductInput& in, int s)
{
    ExclusionMap m = merge_params(vars_of(in.x), vars_of(in.y));
    if (s < 0 || s >= int(m.merged.size())) throw MathError("slot index out of range");
    return m.merged[s];
}

EpsSeries partial(const ProductInput& in, int s, const DualVector& wp, const VoaContext& ctx)
{
    const int v = merged_var(in, s);
    EpsSeries p = eps_product(in, wp, ctx), r(p.lmax);
    for (auto& [l, f] : p.c) r.add_to(l, derivative(f, v));
    return r;
}

EpsSeries partial_by_insertion(const ProductInput& in, int s, const DualVector& wp, const VoaContext& ctx)
{
    const int v = merged_var(in, s);
    int top = 0;
    for (auto& [x, z] : in.x) top = std::max(top, x.max_weight());
    for (auto& [x, z] : in.y) top = std::max(top, x.max_weight());
    const VoaContext big = wide_ctx(top + 2);
    EpsSeries r(ctx.lmax);
    for (size_t i = 0; i < in.x.size(); ++i)
        if (in.x[i].second == v) {
            ProductInput q = in;
            q.x[i].first = virasoro(big, -1, in.x[i].first);
            r = r + eps_product(q, wp, ctx);
        }
    for (size_t j = 0; j < in.y.size(); ++j)
        if (in.y[j].second == v) {
            ProductInput q = in;
            q.y[j].first = virasoro(big, -1, in.y[j].first);
            r = r + eps_product(q, wp, ctx);
        }
    return r;
}

EpsSeries partial_sum_by_shift(const ProductInput& in, const DualVector& wp, const VoaContext& ctx)
{
    EVal a = e_val(in.phi, in.x), b = e_val(in.psi, in.y);
    ProductOptions opt;
    return level_sum(ctx, opt, [&](const GradedVector& u, const GradedVector& ub) {
        RatFunc fa = sewing_factor(wp, a, u, ZETA1, ctx), fb = sewing_factor(wp, b, ub, ZETA2, ctx);
        return sewing_factor_shift(wp, a, u, ZETA1, ctx) * fb + fa * sewing_factor_shift(wp, b, ub, ZETA2, ctx);
    });
}

static InsertionSpec merged_args(const ProductInput& in)
{
    ExclusionMap m = merge_params(vars_of(in.x), vars_of(in.y));
    if (m.r() != 0) throw MathError("permutations need r = 0");
    InsertionSpec all = in.x;
    all.insert(all.end(), in.y.begin(), in.y.end());
    return all;
}

EpsSeries sigma_on_product(const std::vector<int>& sigma, const ProductInput& in, const DualVector& wp,
                           const VoaContext& ctx)
{
    InsertionSpec all = merged_args(in);
    if (sigma.size() != all.size()) throw MathError("arity mismatch");
    ProductInput q = in;
    const size_t k = in.x.size();
    q.x.clear();
    q.y.clear();
    for (size_t i = 0; i < all.size(); ++i) (i < k ? q.x : q.y).push_back(all[sigma[i]]);
    return eps_product(q, wp, ctx);
}

EpsSeries product_shuffle_sum(const ProductInput& in, int s, const DualVector& wp, const VoaContext& ctx)
{
    const int N = int(in.x.size() + in.y.size());
    EpsSeries r(ctx.lmax);
    if (N < 2) return r;
    if (s < 1 || s > N - 1) throw MathError("split out of range");
    for (auto& sig : shuffles(N, s)) {
        auto inv = inverse_perm(sig);
        r = r + sigma_on_product(inv, in, wp, ctx) * Scalar(perm_sign(inv));
    }
    return r;
}

EpsSeries commutator_product(const ProductInput& in, const DualVector& wp, const VoaContext& ctx)
{
    InsertionSpec all = merged_args(in);
    const size_t n = in.psi.n;
    ProductInput sw;
    sw.phi = in.psi;
    sw.psi = in.phi;
    sw.x.assign(all.begin(), all.begin() + n);
    sw.y.assign(all.begin() + n, all.end());
    return eps_product(in, wp, ctx) - eps_product(sw, wp, ctx);
}

CheckReport split_independence_check(const GradedVector& w, const InsertionSpec& ins, int s1, int s2,
                                     const DualVector& wp, const VoaContext& ctx)
{
    const int N = int(ins.size());
    if (s1 < 0 || s1 > N || s2 < 0 || s2 > N) throw MathError("split out of range");
    auto at = [&](int s) {
        ProductInput p;
        p.phi = Correlator::e_element(w, s);
        p.psi = Correlator::e_element(w, N - s);
        p.x.assign(ins.begin(), ins.begin() + s);
        p.y.assign(ins.begin() + s, ins.end());
        return eps_product(p, wp, ctx);
    };
    EpsSeries a = at(s1), b = at(s2);
    CheckReport rep;
    for (int l = 0; l <= ctx.lmax; ++l)
        if (a.coeff(l) != b.coeff(l)) {
            rep.fail("splits " + std::to_string(s1) + " and " + std::to_string(s2) + " differ at eps^" +
                     std::to_string(l) + ": " + a.coeff(l).str() + " vs " + b.coeff(l).str());
            break;
        }
    return rep;
}

CheckReport product_pole_scan(const EpsSeries& s, const InsertionSpec& x, const InsertionSpec& y, bool allow_origin)
{
    CheckReport rep;
    struct Div {
        MPoly d;
        int bound;
        std::string name;
    };
    std::vector<Div> allowed;
    InsertionSpec all = x;
    all.insert(all.end(), y.begin(), y.end());
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i + 1; j < all.size(); ++j) {
            if (all[i].second == all[j].second) continue;
            allowed.push_back({(MPoly::var(all[i].second) - MPoly::var(all[j].second)).monic(),
                               pole_bound(all[i].first, all[j].first),
                               var_name(all[i].second) + " = " + var_name(all[j].second)});
        }
    if (allow_origin)
        for (auto& [v, z] : all) allowed.push_back({MPoly::var(z), 1 << 20, var_name(z) + " = 0"});
    for (auto& [l, f] : s.c) {
        MPoly rebuilt(Scalar(1));
        for (auto& d : allowed) {
            int k = pole_order(f, d.d);
            if (k > d.bound)
                rep.fail("eps^" + std::to_string(l) + ": pole of order " + std::to_string(k) + " at " + d.name +
                         " exceeds bound " + std::to_string(d.bound));
            if (k) rebuilt = rebuilt * pow(d.d, unsigned(k));
        }
        if (rebuilt != f.den) {
            std::string bad;
            for (auto& [fac, e] : den_factors(f)) {
                bool ok = false;
                for (auto& d : allowed) ok = ok || fac.monic() == d.d;
                if (!ok) {
                    bad = fac.str();
                    break;
                }
            }
            rep.fail("eps^" + std::to_string(l) + ": pole outside the diagonals at " +
                     (bad.empty() ? f.den.str() : bad) + " = 0");
        }
    }
    return rep;
}

static GradedVector scale_L0(const GradedVector& v, const Scalar& t)
{
    GradedVector r;
    for (auto& [l, c] : v.c) {
        Scalar p = 1;
        for (int i = 0; i < weight(l); ++i) p *= t;
        r.add(l, c * p);
    }
    return r;
}

CheckReport check_product_L0(const ProductInput& in, const DualVector& wp, const Scalar& t, const VoaContext& ctx)
{
    CheckReport rep;
    int d = -1;
    for (auto& [l, c] : wp.c) {
        if (d >= 0 && weight(l) != d) throw MathError("homogeneous dual required");
        d = weight(l);
    }
    if (d < 0) return rep;
    EpsSeries base = eps_product(in, wp, ctx);
    auto scaled = [&](const Correlator& phi, const InsertionSpec& ins) {
        Correlator p = phi;
        p.w = scale_L0(phi.w, t);
        std::vector<Arg> args;
        for (auto& [v, z] : ins) args.push_back({{scale_L0(v, t), MPoly::var(z) * t}});
        return evaluator_of(p)(args);
    };
    EpsSeries s = eps_product(scaled(in.phi, in.x), scaled(in.psi, in.y), wp, ctx);
    const std::map<int, RatFunc> zs = {{ZETA1, RatFunc(MPoly::var(ZETA1) * t)},
                                       {ZETA2, RatFunc(MPoly::var(ZETA2) * t)}};
    for (int l = 0; l <= ctx.lmax; ++l) {
        RatFunc lhs = substitute(s.coeff(l), zs);
        RatFunc rhs = base.coeff(l) * pow(RatFunc(t), 2 * d - 2 * l);
        if (lhs != rhs) rep.fail("L(0) homogeneity fails at eps^" + std::to_string(l));
    }
    return rep;
}

}  // namespace fc
