#include "fc/ratfunc.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace fc {

std::string var_name(int v)
{
    if (v >= 0 && v < NZ) return "z" + std::to_string(v + 1);
    switch (v) {
    case ZETA1: return "zeta1";
    case ZETA2: return "zeta2";
    case EPS: return "eps";
    case LAMBDA: return "lambda";
    case SCRATCH: return "_t";
    case TAU: return "tau";
    }
    throw MathError("bad variable index");
}

int var_index(const std::string& s)
{
    if (s == "zeta1") return ZETA1;
    if (s == "zeta2") return ZETA2;
    if (s == "eps") return EPS;
    if (s == "lambda") return LAMBDA;
    if (s == "tau") return TAU;
    if (s.size() >= 2 && s[0] == 'z' && std::all_of(s.begin() + 1, s.end(), ::isdigit)) {
        if (s[1] == '0') return -1;
        int i = std::stoi(s.substr(1));
        if (i >= 1 && i <= NZ) return i - 1;
    }
    return -1;
}

std::string scalar_str(const Scalar& s) { return s.get_str(); }

static Scalar qpow(const Scalar& a, int e)
{
    Scalar r = 1;
    for (int i = 0; i < e; ++i) r *= a;
    return r;
}

Scalar parse_scalar(const std::string& s)
{
    Scalar q;
    if (q.set_str(s, 10) != 0) throw MathError("bad rational literal '" + s + "'");
    q.canonicalize();
    if (q.get_den() == 0) throw MathError("division by zero");
    return q;
}

int Mono::deg() const
{
    int d = 0;
    for (auto x : e) d += x;
    return d;
}

bool GrlexLess::operator()(const Mono& a, const Mono& b) const
{
    int da = a.deg(), db = b.deg();
    if (da != db) return da < db;
    for (int v = NV - 1; v >= 0; --v)
        if (a.e[v] != b.e[v]) return a.e[v] < b.e[v];
    return false;
}

// ---------------------------------------------------------------- MPoly

MPoly::MPoly(const Scalar& c)
{
    if (c != 0) t.emplace(Mono{}, c);
}

MPoly MPoly::var(int v, unsigned e)
{
    Mono m;
    m.e[v] = static_cast<uint16_t>(e);
    return mono(m, 1);
}

MPoly MPoly::mono(const Mono& m, const Scalar& c)
{
    MPoly p;
    if (c != 0) p.t.emplace(m, c);
    return p;
}

bool MPoly::is_const() const { return t.empty() || (t.size() == 1 && t.begin()->first.deg() == 0); }

Scalar MPoly::const_value() const { return t.empty() ? Scalar(0) : t.begin()->second; }

int MPoly::degree() const { return t.empty() ? -1 : t.rbegin()->first.deg(); }

int MPoly::degree_in(int v) const
{
    int d = 0;
    for (auto& [m, c] : t) d = std::max(d, int(m.e[v]));
    return d;
}

int MPoly::min_degree_in(int v) const
{
    if (t.empty()) return 0;
    int d = 1 << 20;
    for (auto& [m, c] : t) d = std::min(d, int(m.e[v]));
    return d;
}

int MPoly::main_var() const
{
    for (int v = NV - 1; v >= 0; --v)
        if (has_var(v)) return v;
    return -1;
}

void MPoly::add_term(const Mono& m, const Scalar& c)
{
    if (c == 0) return;
    auto it = t.find(m);
    if (it == t.end()) {
        t.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second == 0) t.erase(it);
}

MPoly MPoly::monic() const
{
    if (t.empty()) return *this;
    Scalar inv = 1 / lc();
    MPoly r = *this;
    r *= inv;
    return r;
}

std::vector<MPoly> MPoly::coeffs_in(int v) const
{
    std::vector<MPoly> c(degree_in(v) + 1);
    for (auto& [m, x] : t) {
        Mono mm = m;
        int k = mm.e[v];
        mm.e[v] = 0;
        c[k].t.emplace(mm, x);
    }
    return c;
}

MPoly MPoly::from_coeffs(const std::vector<MPoly>& c, int v)
{
    MPoly r;
    for (size_t k = 0; k < c.size(); ++k)
        for (auto& [m, x] : c[k].t) {
            Mono mm = m;
            mm.e[v] = static_cast<uint16_t>(mm.e[v] + k);
            r.add_term(mm, x);
        }
    return r;
}

MPoly& MPoly::operator+=(const MPoly& o)
{
    for (auto& [m, c] : o.t) add_term(m, c);
    return *this;
}

MPoly& MPoly::operator-=(const MPoly& o)
{
    for (auto& [m, c] : o.t) add_term(m, -c);
    return *this;
}

MPoly& MPoly::operator*=(const Scalar& c)
{
    if (c == 0) {
        t.clear();
        return *this;
    }
    for (auto& [m, x] : t) x *= c;
    return *this;
}

bool MPoly::operator<(const MPoly& o) const
{
    auto a = t.rbegin(), b = o.t.rbegin();
    GrlexLess lt;
    for (; a != t.rend() && b != o.t.rend(); ++a, ++b) {
        if (lt(a->first, b->first)) return true;
        if (lt(b->first, a->first)) return false;
        if (a->second != b->second) return a->second < b->second;
    }
    return a == t.rend() && b != o.t.rend();
}

static std::string mono_str(const Mono& m)
{
    std::string s;
    for (int v = 0; v < NV; ++v) {
        if (!m.e[v]) continue;
        if (!s.empty()) s += "*";
        s += var_name(v);
        if (m.e[v] > 1) s += "^" + std::to_string(m.e[v]);
    }
    return s;
}

std::string MPoly::str() const
{
    if (t.empty()) return "0";
    std::string s;
    bool first = true;
    for (auto it = t.rbegin(); it != t.rend(); ++it) {
        const Scalar& c = it->second;
        std::string ms = mono_str(it->first);
        Scalar a = abs(c);
        if (first)
            s += c < 0 ? "-" : "";
        else
            s += c < 0 ? " - " : " + ";
        first = false;
        if (ms.empty())
            s += a.get_str();
        else if (a == 1)
            s += ms;
        else
            s += a.get_str() + "*" + ms;
    }
    return s;
}

MPoly operator+(MPoly a, const MPoly& b) { return a += b; }
MPoly operator-(MPoly a, const MPoly& b) { return a -= b; }
MPoly operator-(const MPoly& a)
{
    MPoly r = a;
    r *= Scalar(-1);
    return r;
}

MPoly operator*(const MPoly& a, const MPoly& b)
{
    MPoly r;
    if (a.is_zero() || b.is_zero()) return r;
    for (auto& [ma, ca] : a.t)
        for (auto& [mb, cb] : b.t) {
            Mono m;
            for (int v = 0; v < NV; ++v) m.e[v] = static_cast<uint16_t>(ma.e[v] + mb.e[v]);
            r.add_term(m, ca * cb);
        }
    return r;
}

MPoly operator*(MPoly a, const Scalar& c) { return a *= c; }

MPoly pow(const MPoly& a, unsigned e)
{
    MPoly r(Scalar(1)), b = a;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

bool div_exact(const MPoly& a, const MPoly& b, MPoly* q)
{
    if (b.is_zero()) throw MathError("division by zero");
    if (b.is_const()) {
        if (q) *q = a * (1 / b.const_value());
        return true;
    }
    MPoly r = a, qq;
    const Mono lb = b.lm();
    const Scalar lcb = b.lc();
    while (!r.is_zero()) {
        const Mono lr = r.lm();
        Mono m;
        for (int v = 0; v < NV; ++v) {
            if (lr.e[v] < lb.e[v]) return false;
            m.e[v] = static_cast<uint16_t>(lr.e[v] - lb.e[v]);
        }
        Scalar c = r.lc() / lcb;
        qq.add_term(m, c);
        for (auto& [mb, cb] : b.t) {
            Mono mm;
            for (int v = 0; v < NV; ++v) mm.e[v] = static_cast<uint16_t>(mb.e[v] + m.e[v]);
            r.add_term(mm, -c * cb);
        }
    }
    if (q) *q = std::move(qq);
    return true;
}

MPoly derivative(const MPoly& a, int v)
{
    MPoly r;
    for (auto& [m, c] : a.t) {
        if (!m.e[v]) continue;
        Mono mm = m;
        mm.e[v]--;
        r.add_term(mm, c * m.e[v]);
    }
    return r;
}

MPoly subst(const MPoly& a, const std::map<int, MPoly>& b)
{
    std::map<std::pair<int, int>, MPoly> cache;
    auto pw = [&](int v, int e) -> const MPoly& {
        auto key = std::make_pair(v, e);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        return cache.emplace(key, pow(b.at(v), e)).first->second;
    };
    MPoly r;
    for (auto& [m, c] : a.t) {
        Mono rest = m;
        MPoly term = MPoly::mono(Mono{}, c);
        for (auto& [v, val] : b) {
            if (!m.e[v]) continue;
            rest.e[v] = 0;
            term = term * pw(v, m.e[v]);
        }
        r += term * MPoly::mono(rest, 1);
    }
    return r;
}

// ---------------------------------------------------------------- gcd

using UPoly = std::vector<MPoly>;

static void trim(UPoly& u)
{
    while (!u.empty() && u.back().is_zero()) u.pop_back();
}

static UPoly prem(const UPoly& A, const UPoly& B)
{
    UPoly R = A;
    const int db = int(B.size()) - 1;
    const MPoly& lb = B.back();
    int e = int(A.size()) - 1 - db + 1;
    while (!R.empty() && int(R.size()) - 1 >= db) {
        const int dr = int(R.size()) - 1;
        MPoly lr = R.back();
        for (auto& c : R) c = c * lb;
        for (int i = 0; i <= db; ++i) R[i + dr - db] -= lr * B[i];
        trim(R);
        --e;
    }
    if (e > 0) {
        MPoly m = pow(lb, e);
        for (auto& c : R) c = c * m;
    }
    return R;
}

static MPoly content(const UPoly& u)
{
    MPoly g;
    for (auto& c : u) {
        g = gcd(g, c);
        if (g.is_const() && !g.is_zero()) return MPoly(Scalar(1));
    }
    return g;
}

static MPoly content_in(const MPoly& a, int v) { return content(a.coeffs_in(v)); }

static void divide_all(UPoly& u, const MPoly& d)
{
    for (auto& c : u) {
        MPoly q;
        if (!div_exact(c, d, &q)) throw MathError("internal: inexact content division");
        c = std::move(q);
    }
}

static Scalar eval_at(const MPoly& p, const std::array<Scalar, NV>& pt)
{
    Scalar r = 0;
    for (auto& [m, c] : p.t) {
        Scalar t = c;
        for (int u = 0; u < NV; ++u)
            if (m.e[u]) t *= qpow(pt[u], m.e[u]);
        r += t;
    }
    return r;
}

using QPoly = std::vector<Scalar>;

static void trimq(QPoly& u)
{
    while (!u.empty() && u.back() == 0) u.pop_back();
}

static int qgcd_degree(QPoly a, QPoly b)
{
    trimq(a);
    trimq(b);
    while (!b.empty()) {
        while (a.size() >= b.size()) {
            Scalar f = a.back() / b.back();
            const size_t s = a.size() - b.size();
            for (size_t i = 0; i < b.size(); ++i) a[i + s] -= f * b[i];
            trimq(a);
            if (a.empty()) break;
        }
        std::swap(a, b);
    }
    return int(a.size()) - 1;
}

// -1 when no usable evaluation point was found
static int image_gcd_degree(const UPoly& A, const UPoly& B)
{
    for (int attempt = 0; attempt < 4; ++attempt) {
        std::array<Scalar, NV> pt;
        for (int u = 0; u < NV; ++u) pt[u] = 3 + 7 * u + 13 * attempt * (u % 5 + 1);
        QPoly a, b;
        for (auto& c : A) a.push_back(eval_at(c, pt));
        for (auto& c : B) b.push_back(eval_at(c, pt));
        if (a.back() == 0 || b.back() == 0) continue;
        return qgcd_degree(a, b);
    }
    return -1;
}

MPoly gcd(const MPoly& a, const MPoly& b)
{
    if (a.is_zero()) return b.monic();
    if (b.is_zero()) return a.monic();
    if (a.is_const() || b.is_const()) return MPoly(Scalar(1));
    if (a == b) return a.monic();
    const int v = std::max(a.main_var(), b.main_var());
    if (!a.has_var(v)) return gcd(a, content_in(b, v));
    if (!b.has_var(v)) return gcd(content_in(a, v), b);

    UPoly A = a.coeffs_in(v), B = b.coeffs_in(v);
    MPoly ca = content(A), cb = content(B);
    divide_all(A, ca);
    divide_all(B, cb);
    MPoly c = gcd(ca, cb);
    if (A.size() < B.size()) std::swap(A, B);

    // the gcd of an evaluation image bounds the degree in v
    const int dimg = image_gcd_degree(A, B);
    if (dimg == 0) return c.monic();
    if (dimg == int(B.size()) - 1) {
        MPoly pb = MPoly::from_coeffs(B, v);
        if (div_exact(MPoly::from_coeffs(A, v), pb, nullptr)) return (pb * c).monic();
    }

    MPoly g(Scalar(1)), h(Scalar(1));
    while (true) {
        const int d = int(A.size()) - int(B.size());
        UPoly R = prem(A, B);
        if (R.empty()) break;
        if (R.size() == 1) {
            B = {MPoly(Scalar(1))};
            break;
        }
        A = B;
        divide_all(R, g * pow(h, d));
        B = std::move(R);
        g = A.back();
        if (d == 1) {
            h = g;
        } else if (d > 1) {
            MPoly q;
            if (!div_exact(pow(g, d), pow(h, d - 1), &q)) throw MathError("internal: subresultant");
            h = std::move(q);
        }
    }
    divide_all(B, content(B));
    return (MPoly::from_coeffs(B, v) * c).monic();
}

// ---------------------------------------------------------------- RatFunc

static void sort_factors(std::vector<std::pair<MPoly, int>>& f)
{
    std::sort(f.begin(), f.end(), [](auto& x, auto& y) { return x.first < y.first; });
    std::vector<std::pair<MPoly, int>> out;
    for (auto& p : f) {
        if (p.second == 0) continue;
        if (!out.empty() && out.back().first == p.first)
            out.back().second += p.second;
        else
            out.push_back(p);
    }
    f = std::move(out);
}

RatFunc from_linear_factors(MPoly num, std::vector<std::pair<MPoly, int>> fac)
{
    RatFunc r;
    if (num.is_zero()) return r;
    sort_factors(fac);
    for (auto& [f, e] : fac) {
        MPoly q;
        while (e > 0 && div_exact(num, f, &q)) {
            num = std::move(q);
            --e;
        }
    }
    std::erase_if(fac, [](auto& p) { return p.second == 0; });
    MPoly den(Scalar(1));
    for (auto& [f, e] : fac) den = den * pow(f, e);
    r.num = std::move(num);
    r.den = std::move(den);
    r.factored = true;
    r.dfac = std::move(fac);
    return r;
}

RatFunc normalize(const MPoly& num, const MPoly& den)
{
    if (den.is_zero()) throw MathError("division by zero");
    RatFunc r;
    if (num.is_zero()) return r;
    MPoly g = gcd(num, den), n, d;
    div_exact(num, g, &n);
    div_exact(den, g, &d);
    Scalar s = 1 / d.lc();
    n *= s;
    d *= s;
    r.num = std::move(n);
    r.den = std::move(d);
    if (r.den.is_const()) {
        r.factored = true;
    } else if (r.den.degree() == 1) {
        r.factored = true;
        r.dfac = {{r.den, 1}};
    } else {
        r.factored = false;
    }
    return r;
}

static MPoly cofactor(const std::vector<std::pair<MPoly, int>>& have,
                      const std::map<MPoly, int>& want)
{
    std::map<MPoly, int> h;
    for (auto& [f, e] : have) h[f] = e;
    MPoly r(Scalar(1));
    for (auto& [f, e] : want) {
        int k = e - (h.count(f) ? h[f] : 0);
        if (k > 0) r = r * pow(f, k);
    }
    return r;
}

RatFunc operator+(const RatFunc& a, const RatFunc& b)
{
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.factored && b.factored) {
        std::map<MPoly, int> l;
        for (auto& [f, e] : a.dfac) l[f] = std::max(l[f], e);
        for (auto& [f, e] : b.dfac) l[f] = std::max(l[f], e);
        MPoly n = a.num * cofactor(a.dfac, l) + b.num * cofactor(b.dfac, l);
        return from_linear_factors(std::move(n), {l.begin(), l.end()});
    }
    MPoly g = gcd(a.den, b.den), ca, cb;
    div_exact(b.den, g, &cb);
    div_exact(a.den, g, &ca);
    return normalize(a.num * cb + b.num * ca, a.den * cb);
}

RatFunc sum(const std::vector<RatFunc>& fs)
{
    std::map<MPoly, int> l;
    std::vector<const RatFunc*> nz;
    bool factored = true;
    for (auto& f : fs) {
        if (f.is_zero()) continue;
        nz.push_back(&f);
        factored = factored && f.factored;
        for (auto& [g, e] : f.dfac) l[g] = std::max(l[g], e);
    }
    if (nz.empty()) return RatFunc();
    if (nz.size() == 1) return *nz[0];
    if (!factored) {
        RatFunc r;
        for (auto* f : nz) r += *f;
        return r;
    }
    MPoly n;
    for (auto* f : nz) n += f->num * cofactor(f->dfac, l);
    return from_linear_factors(std::move(n), {l.begin(), l.end()});
}

RatFunc operator-(const RatFunc& a)
{
    RatFunc r = a;
    r.num *= Scalar(-1);
    return r;
}

RatFunc operator-(const RatFunc& a, const RatFunc& b) { return a + (-b); }

RatFunc& operator+=(RatFunc& a, const RatFunc& b)
{
    a = a + b;
    return a;
}

RatFunc operator*(const RatFunc& a, const Scalar& c)
{
    if (c == 0) return RatFunc();
    RatFunc r = a;
    r.num *= c;
    return r;
}

RatFunc operator*(const RatFunc& a, const RatFunc& b)
{
    if (a.is_zero() || b.is_zero()) return RatFunc();
    if (a.factored && b.factored) {
        auto f = a.dfac;
        f.insert(f.end(), b.dfac.begin(), b.dfac.end());
        return from_linear_factors(a.num * b.num, std::move(f));
    }
    return normalize(a.num * b.num, a.den * b.den);
}

RatFunc operator/(const RatFunc& a, const RatFunc& b)
{
    if (b.is_zero()) throw MathError("division by zero");
    if (b.num.is_const()) {
        RatFunc inv;
        inv.num = b.den * (1 / b.num.const_value());
        return a * inv;
    }
    if (b.num.degree() == 1 && a.factored && b.factored) {
        Scalar lc = b.num.lc();
        auto f = a.dfac;
        f.emplace_back(b.num.monic(), 1);
        return from_linear_factors(a.num * b.den * (1 / lc), std::move(f));
    }
    return normalize(a.num * b.den, a.den * b.num);
}

RatFunc pow(const RatFunc& a, int e)
{
    if (e < 0) return pow(RatFunc(1) / a, -e);  // keeps linear denominators factored
    RatFunc r(1), b = a;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

RatFunc derivative(const RatFunc& f, int v)
{
    // (n' d - n d') / d^2
    if (f.factored) {
        RatFunc r = from_linear_factors(derivative(f.num, v), f.dfac);
        for (size_t i = 0; i < f.dfac.size(); ++i) {
            auto& [g, e] = f.dfac[i];
            MPoly dg = derivative(g, v);
            if (dg.is_zero()) continue;
            auto fac = f.dfac;
            fac[i].second += 1;
            r += from_linear_factors(f.num * dg * Scalar(-e), fac);
        }
        return r;
    }
    return normalize(derivative(f.num, v) * f.den - f.num * derivative(f.den, v), f.den * f.den);
}

std::string RatFunc::str() const
{
    if (den.is_const()) return "(" + num.str() + ")";
    return "(" + num.str() + ")/(" + den.str() + ")";
}

static RatFunc eval_poly(const MPoly& p, const std::map<int, RatFunc>& b)
{
    std::map<std::pair<int, int>, RatFunc> cache;
    RatFunc r;
    for (auto& [m, c] : p.t) {
        Mono rest = m;
        RatFunc term(c);
        for (auto& [v, val] : b) {
            if (!m.e[v]) continue;
            rest.e[v] = 0;
            auto key = std::make_pair(v, int(m.e[v]));
            auto it = cache.find(key);
            if (it == cache.end()) it = cache.emplace(key, pow(val, m.e[v])).first;
            term = term * it->second;
        }
        r += term * RatFunc(MPoly::mono(rest, 1));
    }
    return r;
}

RatFunc substitute(const RatFunc& f, const std::map<int, RatFunc>& b)
{
    bool linear = f.factored;
    std::map<int, MPoly> pb;
    for (auto& [v, val] : b) {
        if (!val.is_poly() || val.num.degree() > 1) linear = false;
        if (val.is_poly()) pb[v] = val.num * (1 / val.den.const_value());
    }
    if (linear) {
        MPoly num = subst(f.num, pb);
        std::vector<std::pair<MPoly, int>> fac;
        for (auto& [g, e] : f.dfac) {
            MPoly h = subst(g, pb);
            if (h.is_zero()) throw MathError("division by zero");
            Scalar lc = h.lc();
            num *= 1 / qpow(lc, e);
            if (!h.is_const()) fac.emplace_back(h.monic(), e);
        }
        return from_linear_factors(std::move(num), std::move(fac));
    }
    RatFunc d = eval_poly(f.den, b);
    if (d.is_zero()) throw MathError("division by zero");
    return eval_poly(f.num, b) / d;
}

static int multiplicity(MPoly p, const MPoly& d)
{
    int k = 0;
    MPoly q;
    while (!p.is_zero() && div_exact(p, d, &q)) {
        p = std::move(q);
        ++k;
    }
    return k;
}

int pole_order(const RatFunc& f, const MPoly& d)
{
    if (f.is_zero()) return 0;
    MPoly dn = d.monic();
    if (f.factored) {
        for (auto& [g, e] : f.dfac)
            if (g == dn) return e;
        return 0;
    }
    return std::max(0, multiplicity(f.den, dn) - multiplicity(f.num, dn));
}

std::vector<std::pair<MPoly, int>> den_factors(const RatFunc& f)
{
    if (f.factored) return f.dfac;
    return {{f.den, 1}};
}

// ---------------------------------------------------------------- Laurent

const RatFunc& LaurentExpansion::at(int order) const
{
    static const RatFunc zero;
    if (order < lowest || order > K) return zero;
    return coeffs[order - lowest];
}

RatFunc LaurentExpansion::reconstruct() const
{
    RatFunc base = RatFunc::var(var);
    if (other >= 0) base = base - RatFunc::var(other);
    RatFunc r;
    for (size_t i = 0; i < coeffs.size(); ++i) r += coeffs[i] * pow(base, lowest + int(i));
    return r;
}

LaurentExpansion laurent_expand(const RatFunc& f, int var, int K, int other)
{
    if (other >= 0) {
        RatFunc g = substitute(f, {{var, RatFunc::var(other) + RatFunc::var(SCRATCH)}});
        LaurentExpansion e = laurent_expand(g, SCRATCH, K);
        e.var = var;
        e.other = other;
        return e;
    }
    LaurentExpansion out;
    out.var = var;
    out.K = K;
    if (f.is_zero()) {
        out.lowest = K + 1;
        return out;
    }
    int kd = f.den.min_degree_in(var), kn = f.num.min_degree_in(var);
    out.lowest = kn - kd;
    if (K < out.lowest) return out;
    Mono sh;
    sh.e[var] = static_cast<uint16_t>(kd);
    MPoly dq, nq;
    div_exact(f.den, MPoly::mono(sh, 1), &dq);
    sh.e[var] = static_cast<uint16_t>(kn);
    div_exact(f.num, MPoly::mono(sh, 1), &nq);
    auto d = dq.coeffs_in(var), n = nq.coeffs_in(var);
    RatFunc d0(d[0]);
    int count = K - out.lowest + 1;
    for (int j = 0; j < count; ++j) {
        RatFunc s = j < int(n.size()) ? RatFunc(n[j]) : RatFunc();
        for (int i = 1; i <= j && i < int(d.size()); ++i)
            if (!d[i].is_zero()) s = s - RatFunc(d[i]) * out.coeffs[j - i];
        out.coeffs.push_back(s / d0);
    }
    return out;
}

// ---------------------------------------------------------------- EpsSeries

EpsSeries EpsSeries::constant(const RatFunc& f, int L)
{
    EpsSeries s(L);
    if (!f.is_zero() && L >= 0) s.c[0] = f;
    return s;
}

const RatFunc& EpsSeries::coeff(int l) const
{
    static const RatFunc zero;
    if (l > lmax) throw MathError("beyond truncation");
    auto it = c.find(l);
    return it == c.end() ? zero : it->second;
}

void EpsSeries::add_to(int l, const RatFunc& f)
{
    if (l > lmax || f.is_zero()) return;
    auto it = c.find(l);
    if (it == c.end()) {
        c.emplace(l, f);
        return;
    }
    it->second += f;
    if (it->second.is_zero()) c.erase(it);
}

bool EpsSeries::is_zero() const { return c.empty(); }

EpsSeries EpsSeries::truncate(int L) const
{
    EpsSeries s(std::min(L, lmax));
    for (auto& [l, f] : c)
        if (l <= s.lmax) s.c.emplace(l, f);
    return s;
}

bool EpsSeries::operator==(const EpsSeries& o) const
{
    int L = std::min(lmax, o.lmax);
    return truncate(L).c == o.truncate(L).c;
}

std::string EpsSeries::str() const
{
    if (c.empty()) return "0";
    std::string s;
    for (auto& [l, f] : c) {
        if (!s.empty()) s += " + ";
        s += f.str();
        if (l != 0) s += "*eps^" + std::to_string(l);
    }
    return s;
}

EpsSeries operator+(const EpsSeries& a, const EpsSeries& b)
{
    EpsSeries r = a.truncate(std::min(a.lmax, b.lmax));
    for (auto& [l, f] : b.c) r.add_to(l, f);
    return r;
}

EpsSeries operator-(const EpsSeries& a, const EpsSeries& b) { return a + b * Scalar(-1); }

EpsSeries operator*(const EpsSeries& a, const EpsSeries& b)
{
    EpsSeries r(std::min(a.lmax, b.lmax));
    for (auto& [i, f] : a.c)
        for (auto& [j, g] : b.c)
            if (i + j <= r.lmax) r.add_to(i + j, f * g);
    return r;
}

EpsSeries operator*(const EpsSeries& a, const Scalar& s)
{
    EpsSeries r(a.lmax);
    if (s == 0) return r;
    for (auto& [l, f] : a.c) r.c.emplace(l, f * s);
    return r;
}

// ---------------------------------------------------------------- LinProd

void LinProd::add(const std::vector<int16_t>& e, const Scalar& c)
{
    if (c == 0) return;
    auto it = terms.find(e);
    if (it == terms.end()) {
        terms.emplace(e, c);
        return;
    }
    it->second += c;
    if (it->second == 0) terms.erase(it);
}

RatFunc LinProd::to_ratfunc() const
{
    if (terms.empty()) return RatFunc();
    // map each atom to (normalized factor index or -1 for constants, scale)
    std::vector<MPoly> uniq;
    std::vector<int> idx(atoms.size(), -1);
    std::vector<Scalar> scale(atoms.size(), Scalar(1));
    std::vector<bool> used(atoms.size(), false);
    for (auto& [e, c] : terms)
        for (size_t a = 0; a < atoms.size(); ++a)
            if (e[a] != 0) used[a] = true;
    for (size_t a = 0; a < atoms.size(); ++a) {
        if (!used[a]) continue;
        const MPoly& p = atoms[a];
        if (p.is_zero()) throw MathError("not in configuration space");
        if (p.is_const()) {
            scale[a] = p.const_value();
            continue;
        }
        scale[a] = p.lc();
        MPoly m = p.monic();
        auto it = std::find(uniq.begin(), uniq.end(), m);
        if (it == uniq.end()) {
            idx[a] = int(uniq.size());
            uniq.push_back(m);
        } else {
            idx[a] = int(it - uniq.begin());
        }
    }
    std::map<std::vector<int>, Scalar> merged;
    for (auto& [e, c] : terms) {
        std::vector<int> ue(uniq.size(), 0);
        Scalar cc = c;
        for (size_t a = 0; a < atoms.size(); ++a) {
            if (!e[a]) continue;
            int k = e[a];
            Scalar s = qpow(scale[a], std::abs(k));
            if (k > 0)
                cc *= s;
            else
                cc /= s;
            if (idx[a] >= 0) ue[idx[a]] += k;
        }
        merged[ue] += cc;
    }
    std::vector<int> D(uniq.size(), 0);
    for (auto& [e, c] : merged)
        for (size_t a = 0; a < uniq.size(); ++a) D[a] = std::max(D[a], -e[a]);
    std::map<std::pair<int, int>, MPoly> cache;
    auto pw = [&](int a, int k) -> const MPoly& {
        auto key = std::make_pair(a, k);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, pow(uniq[a], k)).first;
        return it->second;
    };
    MPoly num;
    for (auto& [e, c] : merged) {
        if (c == 0) continue;
        MPoly term(c);
        for (size_t a = 0; a < uniq.size(); ++a) {
            int k = e[a] + D[a];
            if (k) term = term * pw(int(a), k);
        }
        num += term;
    }
    std::vector<std::pair<MPoly, int>> fac;
    for (size_t a = 0; a < uniq.size(); ++a)
        if (D[a]) fac.emplace_back(uniq[a], D[a]);
    return from_linear_factors(std::move(num), std::move(fac));
}

// ---------------------------------------------------------------- parser

namespace {

struct Parser {
    const std::string& s;
    size_t p = 0;

    void ws()
    {
        while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
    }
    [[noreturn]] void fail(const std::string& m)
    {
        throw MathError("parse error at position " + std::to_string(p) + ": " + m);
    }
    bool eat(char c)
    {
        ws();
        if (p < s.size() && s[p] == c) {
            ++p;
            return true;
        }
        return false;
    }
    RatFunc expr()
    {
        RatFunc r = term();
        while (true) {
            if (eat('+'))
                r = r + term();
            else if (eat('-'))
                r = r - term();
            else
                return r;
        }
    }
    RatFunc term()
    {
        RatFunc r = factor();
        while (true) {
            if (eat('*'))
                r = r * factor();
            else if (eat('/')) {
                r = r * factor(true);
            } else
                return r;
        }
    }
    // inverted: parse x^e and return x^-e, inverting the base first so
    // linear bases stay in factored form
    RatFunc factor(bool inverted = false)
    {
        if (eat('-')) return -factor(inverted);
        if (eat('+')) return factor(inverted);
        RatFunc b = base();
        if (inverted) {
            if (b.is_zero()) fail("division by zero");
            b = RatFunc(1) / b;
        }
        if (eat('^')) {
            ws();
            bool neg = eat('-');
            ws();
            size_t q = p;
            while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) ++p;
            if (q == p) fail("expected exponent");
            int e = std::stoi(s.substr(q, p - q));
            if (neg && b.is_zero()) fail("division by zero");
            return pow(b, neg ? -e : e);
        }
        return b;
    }
    RatFunc base()
    {
        ws();
        if (p >= s.size()) fail("unexpected end");
        if (eat('(')) {
            RatFunc r = expr();
            if (!eat(')')) fail("expected ')'");
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(s[p]))) {
            size_t q = p;
            while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) ++p;
            return RatFunc(Scalar(mpz_class(s.substr(q, p - q))));
        }
        if (std::isalpha(static_cast<unsigned char>(s[p]))) {
            size_t q = p;
            while (p < s.size() && std::isalnum(static_cast<unsigned char>(s[p]))) ++p;
            std::string name = s.substr(q, p - q);
            int v = var_index(name);
            if (v < 0) {
                p = q;
                fail("unknown variable '" + name + "'");
            }
            return RatFunc::var(v);
        }
        fail(std::string("unexpected character '") + s[p] + "'");
    }
};

}  // namespace

RatFunc parse_ratfunc(const std::string& s)
{
    Parser ps{s};
    RatFunc r = ps.expr();
    ps.ws();
    if (ps.p != s.size()) ps.fail("trailing input");
    return r;
}

}  // namespace fc
