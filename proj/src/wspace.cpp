#include "fc/wspace.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <unordered_map>

namespace fc {

// ---------------------------------------------------------------- Wick engine

namespace {

Scalar binom_q(long a, long b)
{
    if (b < 0) return 0;
    Scalar r = 1;
    for (long i = 0; i < b; ++i) r = r * Scalar(a - i) / Scalar(i + 1);
    return r;
}

Scalar factorial(long n)
{
    Scalar r = 1;
    for (long i = 2; i <= n; ++i) r *= i;
    return r;
}

enum Kind : uint8_t { OUT, FIELD, IN };

// OUT: mode a(m) of the dual; IN: mode a(-m) of w; FIELD: d^{m-1}a(p)/(m-1)! at position grp
struct Fac {
    Kind k;
    int grp;
    int m;
};

using Poly = std::map<std::vector<int16_t>, Scalar>;

struct Atoms {
    int n = 0;
    std::vector<MPoly> list;
    std::vector<int> pair, single;

    explicit Atoms(const std::vector<Insertion>& ins) : n(int(ins.size()))
    {
        pair.assign(n * n, -1);
        single.assign(n, -1);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                pair[i * n + j] = int(list.size());
                list.push_back(ins[i].pos - ins[j].pos);
            }
        for (int i = 0; i < n; ++i) {
            single[i] = int(list.size());
            list.push_back(ins[i].pos);
        }
    }

    // a is left of b in the operator order
    bool contract(const Fac& a, const Fac& b, Scalar& c, int& atom, int& e) const
    {
        atom = -1;
        e = 0;
        if (a.k == OUT && b.k == IN) {
            if (a.m != b.m) return false;
            c = a.m;
            return true;
        }
        if (a.k == OUT && b.k == FIELD) {
            // <a(n) d^{m-1}a(x)/(m-1)!> = n C(n-1, m-1) x^{n-m}
            if (b.m > a.m) return false;
            c = Scalar(a.m) * binom_q(a.m - 1, b.m - 1);
            atom = single[b.grp];
            e = a.m - b.m;
            return true;
        }
        if (a.k == FIELD && b.k == IN) {
            // n C(-n-1, m-1) x^{-n-m}
            c = Scalar(b.m) * binom_q(-b.m - 1, a.m - 1);
            atom = single[a.grp];
            e = -b.m - a.m;
            return true;
        }
        if (a.k == FIELD && b.k == FIELD) {
            if (a.grp == b.grp) return false;
            c = factorial(a.m + b.m - 1) / (factorial(a.m - 1) * factorial(b.m - 1));
            if (a.m % 2 == 0) c = -c;
            atom = pair[a.grp * n + b.grp];
            e = -(a.m + b.m);
            return true;
        }
        return false;
    }
};

struct Hafnian {
    size_t N;
    size_t natoms;
    std::vector<Scalar> cc;
    std::vector<int> at, ex;
    std::unordered_map<uint64_t, Poly> memo;
    Poly unit;

    Hafnian(const std::vector<Fac>& f, const Atoms& A) : N(f.size()), natoms(A.list.size())
    {
        cc.assign(N * N, 0);
        at.assign(N * N, -1);
        ex.assign(N * N, 0);
        for (size_t i = 0; i < N; ++i)
            for (size_t j = i + 1; j < N; ++j) {
                Scalar c;
                int a, e;
                if (A.contract(f[i], f[j], c, a, e) && c != 0) {
                    cc[i * N + j] = c;
                    at[i * N + j] = a;
                    ex[i * N + j] = e;
                }
            }
        unit[std::vector<int16_t>(natoms, 0)] = 1;
    }

    const Poly& get(uint64_t mask)
    {
        if (mask == 0) return unit;
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        Poly r;
        const int i = __builtin_ctzll(mask);
        const uint64_t rest = mask & ~(uint64_t(1) << i);
        for (uint64_t m = rest; m; m &= m - 1) {
            const int j = __builtin_ctzll(m);
            const size_t k = size_t(i) * N + size_t(j);
            if (cc[k] == 0) continue;
            const Poly& sub = get(rest & ~(uint64_t(1) << j));
            for (auto& [e, c] : sub) {
                std::vector<int16_t> e2 = e;
                if (at[k] >= 0) e2[at[k]] = int16_t(e2[at[k]] + ex[k]);
                Scalar v = c * cc[k];
                auto [pos, fresh] = r.emplace(std::move(e2), v);
                if (!fresh) {
                    pos->second += v;
                    if (pos->second == 0) r.erase(pos);
                }
            }
        }
        return memo.emplace(mask, std::move(r)).first->second;
    }
};

struct Expander {
    const std::vector<Insertion>& ins;
    const Atoms& atoms;
    LinProd& out;
    std::vector<Fac> base;
    std::vector<const FockLabel*> pick;

    void run(size_t i, const Scalar& coef, const FockLabel& mu, const FockLabel& nu)
    {
        if (i == ins.size()) {
            std::vector<Fac> f;
            for (int p : nu) f.push_back({OUT, -1, p});
            for (size_t g = 0; g < ins.size(); ++g)
                for (int p : *pick[g]) f.push_back({FIELD, int(g), p});
            for (int p : mu) f.push_back({IN, -2, p});
            if (f.size() % 2) return;
            if (f.size() > 64) throw MathError("correlator too large");
            Hafnian h(f, atoms);
            const uint64_t all = f.size() == 64 ? ~uint64_t(0) : (uint64_t(1) << f.size()) - 1;
            for (auto& [e, c] : h.get(all)) out.add(e, c * coef);
            return;
        }
        for (auto& [l, c] : ins[i].v.c) {
            pick[i] = &l;
            run(i + 1, coef * c, mu, nu);
        }
    }
};

VoaContext wide_ctx(int nmax)
{
    VoaContext c;
    c.nmax = nmax;
    c.lmax = 0;
    return c;
}

}  // namespace

LinProd correlator_lp(const DualVector& wp, const std::vector<Insertion>& ins, const GradedVector& w)
{
    Atoms atoms(ins);
    LinProd out;
    out.atoms = atoms.list;
    Expander ex{ins, atoms, out, {}, std::vector<const FockLabel*>(ins.size(), nullptr)};
    for (auto& [nu, cn] : wp.c)
        for (auto& [mu, cm] : w.c) ex.run(0, cn * cm / label_norm(nu), mu, nu);
    return out;
}

RatFunc correlator(const DualVector& wp, const std::vector<Insertion>& ins, const GradedVector& w)
{
    return correlator_lp(wp, ins, w).to_ratfunc();
}

VecRF project_weight(const std::vector<Insertion>& ins, const GradedVector& w, int q)
{
    VecRF r;
    for (auto& l : partitions(q)) {
        RatFunc c = correlator(DualVector::of(l), ins, w);
        if (!c.is_zero()) r.emplace(l, std::move(c));
    }
    return r;
}

std::vector<Insertion> positioned(const InsertionSpec& ins)
{
    std::vector<Insertion> out;
    for (auto& [v, z] : ins) out.push_back({v, MPoly::var(z)});
    return out;
}

// ---------------------------------------------------------------- correlators

Correlator Correlator::e_element(const GradedVector& w, int n)
{
    Correlator c;
    c.w = w;
    c.n = n;
    return c;
}

std::string Correlator::desc() const
{
    std::string s = "E[" + (w.is_zero() ? std::string("0") : w.str()) + "; " + std::to_string(n) + "]";
    if (!perm.empty()) {
        s += "{";
        for (size_t i = 0; i < perm.size(); ++i) s += (i ? "," : "") + std::to_string(perm[i] + 1);
        s += "}";
    }
    return s;
}

Correlator parse_correlator(const std::string& s)
{
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos || s.compare(b, 2, "E[") != 0 || s[e] != ']')
        throw MathError("parse error at position 0: expected E[<state>; <n>]");
    std::string inner = s.substr(b + 2, e - b - 2);
    auto semi = inner.rfind(';');
    if (semi == std::string::npos) throw MathError("parse error at position " + std::to_string(e) + ": expected ';'");
    std::string num = inner.substr(semi + 1);
    num.erase(0, num.find_first_not_of(" \t"));
    num.erase(num.find_last_not_of(" \t") + 1);
    if (num.empty() || !std::all_of(num.begin(), num.end(), ::isdigit))
        throw MathError("parse error at position " + std::to_string(b + 2 + semi + 1) + ": expected arity");
    return Correlator::e_element(parse_state(inner.substr(0, semi)), std::stoi(num));
}

static std::vector<Insertion> apply_perm(const Correlator& phi, const std::vector<Insertion>& ins)
{
    if (int(ins.size()) != phi.n) throw MathError("arity mismatch");
    if (phi.perm.empty()) return ins;
    std::vector<Insertion> r;
    for (int p : phi.perm) r.push_back(ins[p]);
    return r;
}

static void check_config(const InsertionSpec& ins)
{
    for (size_t i = 0; i < ins.size(); ++i)
        for (size_t j = i + 1; j < ins.size(); ++j)
            if (ins[i].second == ins[j].second) throw MathError("not in configuration space");
}

RatFunc evaluate_at(const Correlator& phi, const DualVector& wp, const std::vector<Insertion>& ins)
{
    return correlator(wp, apply_perm(phi, ins), phi.w);
}

RatFunc evaluate(const Correlator& phi, const DualVector& wp, const InsertionSpec& ins)
{
    check_config(ins);
    return evaluate_at(phi, wp, positioned(ins));
}

VecRF project(const Correlator& phi, const InsertionSpec& ins, int q, const VoaContext& ctx)
{
    if (q > ctx.nmax) throw MathError("beyond truncation");
    check_config(ins);
    return project_weight(apply_perm(phi, positioned(ins)), phi.w, q);
}

// ---------------------------------------------------------------- permutations

std::vector<int> compose_perm(const std::vector<int>& s, const std::vector<int>& t)
{
    std::vector<int> r(t.size());
    for (size_t i = 0; i < t.size(); ++i) r[i] = s[t[i]];
    return r;
}

std::vector<int> inverse_perm(const std::vector<int>& s)
{
    std::vector<int> r(s.size());
    for (size_t i = 0; i < s.size(); ++i) r[s[i]] = int(i);
    return r;
}

int perm_sign(const std::vector<int>& s)
{
    int inv = 0;
    for (size_t i = 0; i < s.size(); ++i)
        for (size_t j = i + 1; j < s.size(); ++j)
            if (s[i] > s[j]) ++inv;
    return inv % 2 ? -1 : 1;
}

Correlator sigma_act(const std::vector<int>& sigma, const Correlator& phi)
{
    if (int(sigma.size()) != phi.n) throw MathError("arity mismatch");
    Correlator r = phi;
    std::vector<int> p = phi.perm;
    if (p.empty()) {
        p.resize(phi.n);
        std::iota(p.begin(), p.end(), 0);
    }
    r.perm = compose_perm(sigma, p);
    bool id = true;
    for (int i = 0; i < phi.n; ++i) id = id && r.perm[i] == i;
    if (id) r.perm.clear();
    return r;
}

std::vector<std::vector<int>> shuffles(int l, int s)
{
    // choose the image set of the first s positions
    std::vector<std::vector<int>> out;
    std::vector<bool> sel(l, false);
    std::fill(sel.begin(), sel.begin() + s, true);
    do {
        std::vector<int> sig;
        for (int i = 0; i < l; ++i)
            if (sel[i]) sig.push_back(i);
        for (int i = 0; i < l; ++i)
            if (!sel[i]) sig.push_back(i);
        out.push_back(sig);
    } while (std::prev_permutation(sel.begin(), sel.end()));
    std::sort(out.begin(), out.end());
    return out;
}

RatFunc shuffle_sum(const Correlator& phi, int s, const DualVector& wp, const InsertionSpec& ins)
{
    RatFunc r;
    if (phi.n < 2) return r;
    if (s < 1 || s > phi.n - 1) throw MathError("split out of range");
    for (auto& sig : shuffles(phi.n, s)) {
        auto inv = inverse_perm(sig);
        r += evaluate(sigma_act(inv, phi), wp, ins) * Scalar(perm_sign(inv));
    }
    return r;
}

// ---------------------------------------------------------------- L(-1), L(0)

CheckReport check_L_minus1(const Correlator& phi, const DualVector& wp, const InsertionSpec& ins)
{
    CheckReport rep;
    RatFunc f = evaluate(phi, wp, ins);
    int top = phi.w.max_weight();
    for (auto& [v, z] : ins) top = std::max(top, v.max_weight());
    const VoaContext big = wide_ctx(top + 2);
    RatFunc sum;
    for (size_t i = 0; i < ins.size(); ++i) {
        RatFunc d = derivative(f, ins[i].second);
        InsertionSpec mod = ins;
        mod[i].first = virasoro(big, -1, ins[i].first);
        if (d != evaluate(phi, wp, mod)) rep.fail("L(-1) derivative mismatch at slot " + std::to_string(i + 1));
        sum += d;
    }
    int dtop = 0;
    for (auto& [l, c] : wp.c) dtop = std::max(dtop, weight(l));
    DualVector wl = dual_compose(wide_ctx(dtop), wp, [&](const GradedVector& x) { return virasoro(big, -1, x); });
    Correlator shifted = phi;
    shifted.w = virasoro(big, -1, phi.w);
    RatFunc rhs = evaluate(phi, wl, ins) - evaluate(shifted, wp, ins);
    if (sum != rhs) rep.fail("summed L(-1) property mismatch");
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

CheckReport check_L0(const Correlator& phi, const DualVector& wp, const InsertionSpec& ins, const Scalar& t)
{
    CheckReport rep;
    if (t == 0) throw MathError("scale must be nonzero");
    check_config(ins);
    // <w', t^{L(0)} X> scales each dual component by t^{weight}
    DualVector ws;
    for (auto& [l, c] : wp.c) {
        Scalar p = 1;
        for (int i = 0; i < weight(l); ++i) p *= t;
        ws.add(l, c * p);
    }
    RatFunc lhs = evaluate(phi, ws, ins);
    std::vector<Insertion> sc;
    for (auto& [v, z] : ins) sc.push_back({scale_L0(v, t), MPoly::var(z) * t});
    Correlator ph = phi;
    ph.w = scale_L0(phi.w, t);
    RatFunc rhs = evaluate_at(ph, wp, sc);
    if (lhs != rhs) rep.fail("L(0) conjugation mismatch");
    return rep;
}

// ---------------------------------------------------------------- poles

int pole_bound(const GradedVector& a, const GradedVector& b) { return a.max_weight() + b.max_weight(); }

CheckReport check_poles(const RatFunc& f, const InsertionSpec& ins, bool allow_origin)
{
    CheckReport rep;
    if (f.is_zero()) return rep;
    MPoly rebuilt(Scalar(1));
    for (size_t i = 0; i < ins.size(); ++i)
        for (size_t j = i + 1; j < ins.size(); ++j) {
            MPoly d = (MPoly::var(ins[i].second) - MPoly::var(ins[j].second)).monic();
            int k = pole_order(f, d);
            int b = pole_bound(ins[i].first, ins[j].first);
            if (k > b)
                rep.fail("pole of order " + std::to_string(k) + " at " + var_name(ins[i].second) + " = " +
                         var_name(ins[j].second) + " exceeds bound " + std::to_string(b));
            if (k) rebuilt = rebuilt * pow(d, unsigned(k));
        }
    if (allow_origin)
        for (auto& [v, z] : ins) {
            int k = pole_order(f, MPoly::var(z));
            if (k) rebuilt = rebuilt * pow(MPoly::var(z), unsigned(k));
        }
    if (rebuilt != f.den) rep.fail("pole outside the allowed locus: denominator " + f.den.str());
    return rep;
}

// ---------------------------------------------------------------- tau expansion

std::map<int, RatFunc> tau_expand(const LinProd& f, int K)
{
    const size_t na = f.atoms.size();
    std::vector<MPoly> A(na), B(na);
    for (size_t a = 0; a < na; ++a) {
        for (auto& [m, c] : f.atoms[a].t) {
            if (m.e[TAU] == 0) {
                A[a].add_term(m, c);
            } else if (m.e[TAU] == 1) {
                Mono mm = m;
                mm.e[TAU] = 0;
                B[a].add_term(mm, c);
            } else {
                throw MathError("atom not affine in tau");
            }
        }
    }
    std::map<std::pair<size_t, int>, std::vector<RatFunc>> cache;
    auto series = [&](size_t a, int e, int J) -> const std::vector<RatFunc>& {
        auto& s = cache[{a, e}];
        if (int(s.size()) > J) return s;
        s.clear();
        RatFunc ra(A[a]), rb(B[a]);
        for (int j = 0; j <= J; ++j) s.push_back(pow(ra, e - j) * pow(rb, j) * binom_q(e, j));
        return s;
    };
    std::map<int, RatFunc> out;
    for (auto& [e, c] : f.terms) {
        int lo = 0;
        RatFunc mono(c);
        for (size_t a = 0; a < na; ++a)
            if (e[a] && A[a].is_zero()) {
                lo += e[a];
                mono = mono * pow(RatFunc(B[a]), e[a]);
            }
        if (lo > K) continue;
        const int J = K - lo;
        std::vector<RatFunc> acc(J + 1);
        acc[0] = mono;
        for (size_t a = 0; a < na; ++a) {
            if (!e[a] || A[a].is_zero()) continue;
            const auto& s = series(a, e[a], J);
            std::vector<RatFunc> nx(J + 1);
            for (int i = 0; i <= J; ++i) {
                if (acc[i].is_zero()) continue;
                for (int j = 0; i + j <= J; ++j)
                    if (!s[j].is_zero()) nx[i + j] += acc[i] * s[j];
            }
            acc = std::move(nx);
        }
        for (int i = 0; i <= J; ++i)
            if (!acc[i].is_zero()) out[lo + i] += acc[i];
    }
    for (auto it = out.begin(); it != out.end();) it = it->second.is_zero() ? out.erase(it) : std::next(it);
    return out;
}

// ---------------------------------------------------------------- composability

static int homogeneous_weight(const GradedVector& v)
{
    int w = 0;
    if (!v.homogeneous(&w)) throw MathError("composability checks need homogeneous insertions");
    return w;
}

static void compare_series(const std::map<int, RatFunc>& a, const std::map<int, RatFunc>& b, int lo, int K,
                           ComposabilityResult& res)
{
    for (int k = lo; k <= K; ++k) {
        auto ia = a.find(k), ib = b.find(k);
        RatFunc x = ia == a.end() ? RatFunc() : ia->second;
        RatFunc y = ib == b.end() ? RatFunc() : ib->second;
        if (x != y) {
            res.ok = false;
            res.detail = "mismatch at tau order " + std::to_string(k);
            return;
        }
    }
}

static bool same_term(const ETerm& a, const ETerm& b)
{
    if (a.w != b.w || a.ops.size() != b.ops.size()) return false;
    for (size_t i = 0; i < a.ops.size(); ++i)
        if (a.ops[i].v != b.ops[i].v || a.ops[i].pos != b.ops[i].pos) return false;
    return true;
}

EVal simplify(const EVal& e)
{
    EVal merged;
    for (auto& t : e) {
        auto it = std::find_if(merged.begin(), merged.end(), [&](const ETerm& m) { return same_term(m, t); });
        if (it == merged.end())
            merged.push_back(t);
        else
            it->c += t.c;
    }
    EVal out;
    for (auto& t : merged)
        if (t.c != 0) out.push_back(std::move(t));
    return out;
}

bool same_value(const EVal& a, const EVal& b)
{
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].c != b[i].c || !same_term(a[i], b[i])) return false;
    return true;
}

RatFunc pair(const DualVector& wp, const EVal& e)
{
    RatFunc r;
    for (auto& t : simplify(e)) r += correlator(wp, t.ops, t.w) * t.c;
    return r;
}

Evaluator evaluator_of(const Correlator& phi)
{
    return [phi](const std::vector<Arg>& args) {
        if (int(args.size()) != phi.n) throw MathError("arity mismatch");
        ETerm t{1, phi.w, {}};
        for (int i = 0; i < phi.n; ++i) {
            const Arg& a = args[phi.perm.empty() ? i : phi.perm[i]];
            t.ops.insert(t.ops.end(), a.begin(), a.end());
        }
        return EVal{t};
    };
}

static std::map<int, RatFunc> tau_series(const DualVector& wp, const EVal& e, int K)
{
    std::map<int, RatFunc> out;
    for (auto& t : e) {
        if (t.c == 0) continue;
        for (auto& [k, f] : tau_expand(correlator_lp(wp, t.ops, t.w), K)) out[k] += f * t.c;
    }
    return out;
}

ComposabilityResult composability_I(const Evaluator& phi, int n, const std::vector<int>& groups,
                                    const InsertionSpec& ins, const std::vector<int>& zeta_vars, const DualVector& wp,
                                    const VoaContext& ctx)
{
    ComposabilityResult res;
    if (int(groups.size()) != n || int(zeta_vars.size()) != n) throw MathError("arity mismatch");
    if (std::accumulate(groups.begin(), groups.end(), 0) != int(ins.size()))
        throw MathError("group sizes must add up to the insertion count");
    check_config(ins);
    for (int zv_ : zeta_vars)
        for (auto& [v, z] : ins)
            if (z == zv_) throw MathError("not in configuration space");

    std::vector<Arg> grp(n);
    std::vector<int> W(n, 0);
    int Wt = 0;
    for (int g = 0, k = 0; g < n; ++g)
        for (int j = 0; j < groups[g]; ++j, ++k) {
            grp[g].push_back({ins[k].first, MPoly::var(ins[k].second)});
            W[g] += homogeneous_weight(ins[k].first);
        }
    for (int g = 0; g < n; ++g) Wt += W[g];
    const int R = ctx.nmax;
    const int K = R - Wt;
    res.certified_order = K;
    res.value = pair(wp, phi(grp));
    if (K < -Wt) {
        res.detail = "truncation too low to certify";
        return res;
    }

    // full value at z_k = zeta_g + tau z_k
    std::vector<Arg> full(n);
    for (int g = 0; g < n; ++g)
        for (auto& x : grp[g]) full[g].push_back({x.v, MPoly::var(zeta_vars[g]) + MPoly::var(TAU) * x.pos});
    auto fexp = tau_series(wp, phi(full), K);

    // P_r of each group: homogeneous of degree r - W_g in its variables
    std::vector<std::vector<VecRF>> proj(n);
    for (int g = 0; g < n; ++g)
        for (int r = 0; r <= R; ++r) proj[g].push_back(project_weight(grp[g], GradedVector::vacuum(), r));

    std::map<int, RatFunc> isum;
    std::vector<int> rs(n);
    std::vector<int> tailmin(n + 1, 0);
    for (int g = n - 1; g >= 0; --g) tailmin[g] = tailmin[g + 1] - W[g];
    std::vector<std::pair<const FockLabel*, const RatFunc*>> pick(n);
    std::function<void(int, int)> labels = [&](int g, int ord) {
        if (g == n) {
            RatFunc c(1);
            std::vector<Arg> slots;
            for (int h = 0; h < n; ++h) {
                c = c * *pick[h].second;
                slots.push_back({{GradedVector::basis(*pick[h].first), MPoly::var(zeta_vars[h])}});
            }
            RatFunc e = pair(wp, phi(slots));
            if (!e.is_zero()) isum[ord] += c * e;
            return;
        }
        for (auto& [l, c] : proj[g][rs[g]]) {
            pick[g] = {&l, &c};
            labels(g + 1, ord);
        }
    };
    std::function<void(int, int)> radii = [&](int g, int ord) {
        if (ord + tailmin[g] > K) return;
        if (g == n) {
            labels(0, ord);
            return;
        }
        for (int r = 0; r <= R; ++r) {
            rs[g] = r;
            radii(g + 1, ord + r - W[g]);
        }
    };
    radii(0, 0);
    compare_series(isum, fexp, -Wt, K, res);
    return res;
}

ComposabilityResult composability_I(const Correlator& phi, const std::vector<int>& groups, const InsertionSpec& ins,
                                    const std::vector<int>& zeta_vars, const DualVector& wp, const VoaContext& ctx)
{
    return composability_I(evaluator_of(phi), phi.n, groups, ins, zeta_vars, wp, ctx);
}

ComposabilityResult composability_J(const Evaluator& phi, int n, const InsertionSpec& front,
                                    const InsertionSpec& inner, const DualVector& wp, const VoaContext& ctx)
{
    ComposabilityResult res;
    if (int(inner.size()) != n) throw MathError("arity mismatch");
    InsertionSpec all = front;
    all.insert(all.end(), inner.begin(), inner.end());
    check_config(all);
    std::vector<Insertion> fr = positioned(front);
    std::vector<Arg> in, scaled;
    int Win = 0;
    for (auto& [v, z] : inner) {
        Win += homogeneous_weight(v);
        in.push_back({{v, MPoly::var(z)}});
        scaled.push_back({{v, MPoly::var(TAU) * MPoly::var(z)}});
    }
    for (auto& x : fr) homogeneous_weight(x.v);

    auto with_front = [&](EVal e) {
        for (auto& t : e) t.ops.insert(t.ops.begin(), fr.begin(), fr.end());
        return e;
    };
    const EVal inner_val = phi(in);
    res.value = pair(wp, with_front(inner_val));
    if (front.empty()) {
        res.certified_order = ctx.nmax;
        return res;
    }

    const int R = ctx.nmax;
    int dmax = 0;
    for (auto& t : inner_val) dmax = std::max(dmax, t.w.max_weight());
    const int K = R - dmax - Win;
    res.certified_order = K;
    const int lo = -(dmax + Win);
    if (K < lo) {
        res.detail = "truncation too low to certify";
        return res;
    }
    auto fexp = tau_series(wp, with_front(phi(scaled)), K);

    std::map<int, RatFunc> jsum;
    for (auto& t : inner_val) {
        if (t.c == 0) continue;
        for (int d = 0; d <= t.w.max_weight(); ++d) {
            GradedVector wd = t.w.component(d);
            if (wd.is_zero()) continue;
            for (int q = 0; q <= R; ++q) {
                const int ord = q - d - Win;
                if (ord > K) break;
                for (auto& [l, c] : project_weight(t.ops, wd, q)) {
                    RatFunc e = correlator(wp, fr, GradedVector::basis(l));
                    if (!e.is_zero()) jsum[ord] += c * e * t.c;
                }
            }
        }
    }
    compare_series(jsum, fexp, lo, K, res);
    return res;
}

ComposabilityResult composability_J(const Correlator& phi, const InsertionSpec& front, const InsertionSpec& inner,
                                    const DualVector& wp, const VoaContext& ctx)
{
    return composability_J(evaluator_of(phi), phi.n, front, inner, wp, ctx);
}

}  // namespace fc
