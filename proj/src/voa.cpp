#include "fc/voa.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>

namespace fc {

int weight(const FockLabel& l)
{
    int w = 0;
    for (int n : l) w += n;
    return w;
}

Scalar label_norm(const FockLabel& l)
{
    Scalar r = 1;
    size_t i = 0;
    while (i < l.size()) {
        size_t j = i;
        while (j < l.size() && l[j] == l[i]) ++j;
        for (size_t k = 1; k <= j - i; ++k) r *= Scalar(l[i]) * Scalar(long(k));
        i = j;
    }
    return r;
}

std::string label_str(const FockLabel& l)
{
    std::string s;
    for (int n : l) s += "a(-" + std::to_string(n) + ")";
    return s + "|0>";
}

static bool label_order(const FockLabel& a, const FockLabel& b)
{
    int wa = weight(a), wb = weight(b);
    if (wa != wb) return wa < wb;
    return a > b;
}

static std::string coef_map_str(const std::map<FockLabel, Scalar>& c)
{
    if (c.empty()) return "0";
    std::vector<FockLabel> keys;
    for (auto& [l, x] : c) keys.push_back(l);
    std::sort(keys.begin(), keys.end(), label_order);
    std::string s;
    bool first = true;
    for (auto& l : keys) {
        const Scalar& x = c.at(l);
        Scalar a = abs(x);
        s += first ? (x < 0 ? "-" : "") : (x < 0 ? " - " : " + ");
        first = false;
        if (a != 1) s += a.get_str() + "*";
        s += label_str(l);
    }
    return s;
}

static void add_to(std::map<FockLabel, Scalar>& m, const FockLabel& l, const Scalar& s)
{
    if (s == 0) return;
    auto it = m.find(l);
    if (it == m.end()) {
        m.emplace(l, s);
        return;
    }
    it->second += s;
    if (it->second == 0) m.erase(it);
}

// ---------------------------------------------------------------- vectors

GradedVector GradedVector::vacuum() { return basis({}); }

GradedVector GradedVector::basis(const FockLabel& l, const Scalar& s)
{
    GradedVector v;
    v.add(l, s);
    return v;
}

int GradedVector::max_weight() const
{
    int w = -1;
    for (auto& [l, x] : c) w = std::max(w, weight(l));
    return w;
}

bool GradedVector::homogeneous(int* w) const
{
    int k = -1;
    for (auto& [l, x] : c) {
        if (k >= 0 && weight(l) != k) return false;
        k = weight(l);
    }
    if (w) *w = k < 0 ? 0 : k;
    return true;
}

GradedVector GradedVector::component(int w) const
{
    GradedVector r;
    for (auto& [l, x] : c)
        if (weight(l) == w) r.c.emplace(l, x);
    return r;
}

void GradedVector::add(const FockLabel& l, const Scalar& s) { add_to(c, l, s); }

GradedVector& GradedVector::operator+=(const GradedVector& o)
{
    for (auto& [l, x] : o.c) add(l, x);
    return *this;
}

GradedVector& GradedVector::operator-=(const GradedVector& o)
{
    for (auto& [l, x] : o.c) add(l, -x);
    return *this;
}

std::string GradedVector::str() const { return coef_map_str(c); }

GradedVector operator+(GradedVector a, const GradedVector& b) { return a += b; }
GradedVector operator-(GradedVector a, const GradedVector& b) { return a -= b; }
GradedVector operator*(GradedVector a, const Scalar& s)
{
    if (s == 0) return GradedVector();
    for (auto& [l, x] : a.c) x *= s;
    return a;
}

DualVector DualVector::of(const FockLabel& l, const Scalar& s)
{
    DualVector d;
    d.add(l, s);
    return d;
}

Scalar DualVector::pair(const GradedVector& v) const
{
    Scalar r = 0;
    for (auto& [l, x] : v.c) {
        auto it = c.find(l);
        if (it != c.end()) r += it->second * x;
    }
    return r;
}

void DualVector::add(const FockLabel& l, const Scalar& s) { add_to(c, l, s); }

DualVector& DualVector::operator+=(const DualVector& o)
{
    for (auto& [l, x] : o.c) add(l, x);
    return *this;
}

std::string DualVector::str() const { return coef_map_str(c); }

DualVector operator*(DualVector a, const Scalar& s)
{
    if (s == 0) return DualVector();
    for (auto& [l, x] : a.c) x *= s;
    return a;
}

void VoaContext::validate() const
{
    if (nmax < 0 || lmax < 0) throw MathError("negative truncation");
    if (nmax < lmax) throw MathError("nmax must be at least lmax");
    if (lambda == 0) throw MathError("lambda must be nonzero");
}

// ---------------------------------------------------------------- bases

static void parts_rec(int n, int maxp, FockLabel& cur, std::vector<FockLabel>& out)
{
    if (n == 0) {
        out.push_back(cur);
        return;
    }
    for (int p = std::min(n, maxp); p >= 1; --p) {
        cur.push_back(p);
        parts_rec(n - p, p, cur, out);
        cur.pop_back();
    }
}

std::vector<FockLabel> partitions(int n)
{
    std::vector<FockLabel> out;
    FockLabel cur;
    if (n >= 0) parts_rec(n, n, cur, out);
    return out;
}

std::vector<FockLabel> basis(const VoaContext& ctx, int level)
{
    if (level < 0) return {};
    if (level > ctx.nmax) throw MathError("beyond truncation");
    return partitions(level);
}

// ---------------------------------------------------------------- modes

GradedVector heis(int k, const GradedVector& u)
{
    GradedVector r;
    if (k == 0) return r;
    for (auto& [l, x] : u.c) {
        if (k < 0) {
            FockLabel m = l;
            m.insert(std::upper_bound(m.begin(), m.end(), -k, std::greater<int>()), -k);
            r.add(m, x);
        } else {
            long mult = std::count(l.begin(), l.end(), k);
            if (!mult) continue;
            FockLabel m = l;
            m.erase(std::find(m.begin(), m.end(), k));
            r.add(m, x * k * mult);
        }
    }
    return r;
}

// binomial (a choose b) for integer a, b >= 0
static Scalar binom(long a, long b)
{
    if (b < 0) return 0;
    Scalar r = 1;
    for (long i = 0; i < b; ++i) r = r * Scalar(a - i) / Scalar(i + 1);
    return r;
}

namespace {

struct ModeEnum {
    const FockLabel& lam;
    int wout, wu, target;
    std::vector<int> ks;
    GradedVector src;
    GradedVector out;

    void run(size_t j, int sum, const Scalar& coef)
    {
        const int left = int(lam.size() - j);
        if (sum + left * wu < target || sum - left * wout > target) return;
        if (j == lam.size()) {
            if (sum != target) return;
            GradedVector v = src;
            for (int k : ks)
                if (k > 0) v = heis(k, v);
            for (int k : ks)
                if (k < 0) v = heis(k, v);
            out += v * coef;
            return;
        }
        const int m = lam[j];
        for (int k = -wout; k <= wu; ++k) {
            if (k == 0) continue;
            Scalar b = binom(-k - 1, m - 1);
            if (b == 0) continue;
            ks.push_back(k);
            run(j + 1, sum + k, coef * b);
            ks.pop_back();
        }
    }
};

std::atomic<long> g_dropped{0};

}  // namespace

long truncation_total() { return g_dropped.load(); }

GradedVector mode_action(const VoaContext& ctx, const GradedVector& v, int n, const GradedVector& u,
                         Truncation* tr)
{
    GradedVector r;
    for (auto& [lam, cv] : v.c) {
        for (auto& [mu, cu] : u.c) {
            if (lam.empty()) {
                if (n == -1) r.add(mu, cv * cu);
                continue;
            }
            const int wout = weight(mu) + weight(lam) - n - 1;
            if (wout < 0) continue;
            ModeEnum e{lam, wout, weight(mu), n + 1 - weight(lam), {}, GradedVector::basis(mu), {}};
            e.run(0, 0, cv * cu);
            r += e.out;
        }
    }
    GradedVector kept;
    for (auto& [l, x] : r.c) {
        if (weight(l) > ctx.nmax) {
            if (tr) tr->dropped++;
            g_dropped.fetch_add(1, std::memory_order_relaxed);
            continue;
        }
        kept.c.emplace(l, x);
    }
    return kept;
}

GradedVector conformal_vector() { return GradedVector::basis({1, 1}, Scalar(1, 2)); }

GradedVector virasoro(const VoaContext& ctx, int n, const GradedVector& u, Truncation* tr)
{
    static const GradedVector omega = conformal_vector();
    return mode_action(ctx, omega, n + 1, u, tr);
}

static VoaContext wide(int nmax)
{
    VoaContext c;
    c.nmax = nmax;
    c.lmax = 0;
    return c;
}

DualVector dual_compose(const VoaContext& ctx, const DualVector& w,
                        const std::function<GradedVector(const GradedVector&)>& op)
{
    DualVector r;
    for (int lev = 0; lev <= ctx.nmax; ++lev)
        for (auto& nu : partitions(lev)) {
            Scalar x = w.pair(op(GradedVector::basis(nu)));
            if (x != 0) r.add(nu, x);
        }
    return r;
}

std::vector<DualVector> dual_translation(const VoaContext& ctx, const DualVector& w)
{
    (void)ctx;
    std::vector<DualVector> out{w};
    DualVector cur = w;
    for (int j = 1; !cur.is_zero(); ++j) {
        int top = 0;
        std::vector<int> levels;
        for (auto& [l, x] : cur.c) {
            top = std::max(top, weight(l));
            if (weight(l) >= 1) levels.push_back(weight(l) - 1);
        }
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        const VoaContext big = wide(top + 1);
        DualVector next;
        for (int lev : levels)
            for (auto& nu : partitions(lev)) {
                Scalar x = cur.pair(virasoro(big, -1, GradedVector::basis(nu)));
                if (x != 0) next.add(nu, x / j);
            }
        if (next.is_zero()) break;
        out.push_back(next);
        cur = next;
    }
    return out;
}

// ---------------------------------------------------------------- bilinear form

// <x_mu, y> by peeling a(-n) off mu: <a(-n)x, y> = (-1)^{n+1} lambda^{-2n} <x, a(n)y>
static Scalar form_rec(const FockLabel& mu, size_t i, const GradedVector& y, const Scalar& lam)
{
    if (y.is_zero()) return 0;
    if (i == mu.size()) {
        auto it = y.c.find(FockLabel{});
        return it == y.c.end() ? Scalar(0) : it->second;
    }
    const int n = mu[i];
    Scalar f = 1;
    for (int k = 0; k < 2 * n; ++k) f /= lam;
    if (n % 2 == 0) f = -f;
    return f * form_rec(mu, i + 1, heis(n, y), lam);
}

Scalar bilinear_form(const VoaContext& ctx, const GradedVector& a, const GradedVector& b)
{
    Scalar r = 0;
    for (auto& [mu, x] : a.c) r += x * form_rec(mu, 0, b, ctx.lambda);
    return r;
}

static RatFunc form_rec_sym(const FockLabel& mu, size_t i, const GradedVector& y)
{
    if (y.is_zero()) return RatFunc();
    if (i == mu.size()) {
        auto it = y.c.find(FockLabel{});
        return it == y.c.end() ? RatFunc() : RatFunc(it->second);
    }
    const int n = mu[i];
    RatFunc f = pow(RatFunc::var(LAMBDA), -2 * n);
    if (n % 2 == 0) f = -f;
    return f * form_rec_sym(mu, i + 1, heis(n, y));
}

RatFunc bilinear_form_symbolic(const GradedVector& a, const GradedVector& b)
{
    RatFunc r;
    for (auto& [mu, x] : a.c) r += form_rec_sym(mu, 0, b) * x;
    return r;
}

std::vector<std::pair<GradedVector, GradedVector>> dual_basis(const VoaContext& ctx, int level)
{
    std::vector<std::pair<GradedVector, GradedVector>> out;
    for (auto& l : basis(ctx, level)) {
        GradedVector u = GradedVector::basis(l);
        Scalar g = bilinear_form(ctx, u, u);
        if (g == 0) throw MathError("degenerate form at level " + std::to_string(level));
        out.emplace_back(u, u * (1 / g));
    }
    return out;
}

std::vector<GradedVector> dual_basis_of(const VoaContext& ctx, const std::vector<GradedVector>& b)
{
    const size_t n = b.size();
    std::vector<std::vector<Scalar>> g(n, std::vector<Scalar>(2 * n, 0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) g[i][j] = bilinear_form(ctx, b[i], b[j]);
        g[i][n + i] = 1;
    }
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        while (piv < n && g[piv][col] == 0) ++piv;
        if (piv == n) throw MathError("degenerate form at level");
        std::swap(g[piv], g[col]);
        Scalar inv = 1 / g[col][col];
        for (auto& x : g[col]) x *= inv;
        for (size_t r = 0; r < n; ++r) {
            if (r == col || g[r][col] == 0) continue;
            Scalar f = g[r][col];
            for (size_t k = 0; k < 2 * n; ++k) g[r][k] -= f * g[col][k];
        }
    }
    // ubar_beta = sum_gamma (G^-1)_{gamma beta} u_gamma
    std::vector<GradedVector> out(n);
    for (size_t beta = 0; beta < n; ++beta)
        for (size_t gam = 0; gam < n; ++gam) out[beta] += b[gam] * g[gam][n + beta];
    return out;
}

// ---------------------------------------------------------------- coordinate changes

static std::vector<Scalar> apply_field(const std::vector<Scalar>& beta, const std::vector<Scalar>& s, int order)
{
    // sum_{k>=1} beta_k z^{k+1} s'(z)
    std::vector<Scalar> r(order + 1, 0);
    for (int e = 1; e <= order; ++e) {
        if (s[e] == 0) continue;
        for (size_t k = 1; k < beta.size(); ++k)
            if (e + int(k) <= order) r[e + k] += beta[k] * e * s[e];
    }
    return r;
}

std::vector<Scalar> exp_series(const std::vector<Scalar>& beta, int order)
{
    std::vector<Scalar> term(order + 1, 0), total(order + 1, 0);
    if (order >= 1) term[1] = 1;
    total = term;
    for (int j = 1; j <= order; ++j) {
        term = apply_field(beta, term, order);
        for (auto& x : term) x /= j;
        for (int e = 0; e <= order; ++e) total[e] += term[e];
    }
    Scalar b0 = beta.empty() ? Scalar(1) : beta[0];
    for (auto& x : total) x *= b0;
    return total;
}

CoordChange solve_exp_coeffs(const std::vector<Scalar>& a, int order)
{
    if (a.size() < 2 || a[1] == 0) throw MathError("not a coordinate change");
    CoordChange f;
    f.order = order;
    f.a.assign(order + 1, 0);
    for (int k = 1; k <= order && k < int(a.size()); ++k) f.a[k] = a[k];
    f.beta.assign(std::max(order, 1), 0);
    f.beta[0] = a[1];
    for (int k = 1; k < order; ++k) {
        auto s = exp_series(f.beta, order);
        f.beta[k] = (f.a[k + 1] - s[k + 1]) / f.beta[0];
    }
    return f;
}

std::vector<Scalar> compose_series(const std::vector<Scalar>& f, const std::vector<Scalar>& g, int order)
{
    std::vector<Scalar> r(order + 1, 0), gp(order + 1, 0);
    gp[0] = 1;
    for (int j = 0; j <= order; ++j) {
        if (j < int(f.size()))
            for (int e = 0; e <= order; ++e) r[e] += f[j] * gp[e];
        std::vector<Scalar> nx(order + 1, 0);
        for (int a = 0; a <= order; ++a) {
            if (gp[a] == 0) continue;
            for (int b = 0; a + b <= order && b < int(g.size()); ++b) nx[a + b] += gp[a] * g[b];
        }
        gp = nx;
    }
    return r;
}

static GradedVector dilate(const Scalar& b0, const GradedVector& u)
{
    GradedVector s;
    for (auto& [l, x] : u.c) {
        Scalar p = 1;
        for (int i = 0; i < weight(l); ++i) p *= b0;
        s.add(l, x * p);
    }
    return s;
}

// exp(sum_{m>0} c_m beta_m L(m)) u; terminates since L(m) lowers weight
static GradedVector exp_positive(const VoaContext& ctx, const CoordChange& f, const GradedVector& u, bool weighted)
{
    GradedVector total = u, term = u;
    for (int j = 1; !term.is_zero(); ++j) {
        GradedVector nx;
        for (size_t m = 1; m < f.beta.size(); ++m) {
            if (f.beta[m] == 0) continue;
            Scalar c = weighted ? Scalar(long(m) + 1) * f.beta[m] : f.beta[m];
            nx += virasoro(ctx, int(m), term) * c;
        }
        term = nx * Scalar(1, j);
        total += term;
    }
    return total;
}

GradedVector apply_Pf(const VoaContext& ctx, const CoordChange& f, const GradedVector& u)
{
    return exp_positive(ctx, f, dilate(f.beta[0], u), true);
}

GradedVector apply_Pf_rep(const VoaContext& ctx, const CoordChange& f, const GradedVector& u)
{
    return dilate(f.beta[0], exp_positive(ctx, f, u, false));
}

// <x', Y(X, z) y> as a Laurent polynomial in z1
static RatFunc matrix_element(const DualVector& x, const GradedVector& X, const GradedVector& y)
{
    RatFunc r;
    std::map<int, int> dw;
    for (auto& [l, c] : x.c) dw[weight(l)] = 1;
    for (int a = 0; a <= X.max_weight(); ++a) {
        GradedVector Xa = X.component(a);
        if (Xa.is_zero()) continue;
        for (int b = 0; b <= y.max_weight(); ++b) {
            GradedVector yb = y.component(b);
            if (yb.is_zero()) continue;
            for (auto& [wx, one] : dw) {
                const int n = a + b - wx - 1;
                Scalar val = x.pair(mode_action(wide(wx), Xa, n, yb));
                if (val != 0) r += pow(RatFunc::var(zv(1)), -n - 1) * val;
            }
        }
    }
    return r;
}

CommutatorReport check_commutator_formula(const VoaContext& ctx, const std::map<int, Scalar>& beta,
                                          const GradedVector& v,
                                          const std::vector<std::pair<FockLabel, FockLabel>>& samples,
                                          int sign)
{
    (void)ctx;
    CommutatorReport rep;
    auto beta_op = [&](const VoaContext& c, const GradedVector& x) {
        GradedVector r;
        for (auto& [n, b] : beta) r += virasoro(c, n, x) * (-b);
        return r;
    };
    RatFunc bz;
    for (auto& [n, b] : beta) bz += pow(RatFunc::var(zv(1)), n + 1) * b;
    for (auto& [nu, mu] : samples) {
        const VoaContext big = wide(weight(nu) + weight(mu) + v.max_weight() + 4);
        DualVector wp = DualVector::of(nu);
        DualVector wpb = dual_compose(big, wp, [&](const GradedVector& x) { return beta_op(big, x); });
        GradedVector u = GradedVector::basis(mu);
        RatFunc lhs = matrix_element(wpb, v, u) - matrix_element(wp, v, beta_op(big, u));
        RatFunc rhs;
        RatFunc d = bz;
        Scalar fact = 1;
        for (int m = -1; m <= v.max_weight(); ++m) {
            if (m >= 0) fact *= m + 1;
            GradedVector Lv = virasoro(big, m, v);
            if (!Lv.is_zero() && !d.is_zero()) rhs += d * matrix_element(wp, Lv, u) * (1 / fact);
            d = derivative(d, zv(1));
        }
        rhs = rhs * Scalar(sign);
        if (lhs != rhs) {
            rep.ok = false;
            rep.detail = "mismatch at w'=" + label_str(nu) + ", u=" + label_str(mu) + ": lhs " + lhs.str() +
                         " rhs " + rhs.str();
            return rep;
        }
    }
    return rep;
}

// ---------------------------------------------------------------- literals

namespace {

struct StateParser {
    const std::string& s;
    size_t p = 0;

    [[noreturn]] void fail(const std::string& m)
    {
        throw MathError("parse error at position " + std::to_string(p) + ": " + m);
    }
    void ws()
    {
        while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
    }
    bool eat(const std::string& t)
    {
        ws();
        if (s.compare(p, t.size(), t) == 0) {
            p += t.size();
            return true;
        }
        return false;
    }
    long integer()
    {
        ws();
        size_t q = p;
        if (p < s.size() && s[p] == '-') ++p;
        while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) ++p;
        if (q == p || (p == q + 1 && s[q] == '-')) {
            p = q;
            fail("expected integer");
        }
        return std::stol(s.substr(q, p - q));
    }
    std::map<FockLabel, Scalar> parse()
    {
        std::map<FockLabel, Scalar> out;
        ws();
        if (s.substr(p) == "0") return out;
        bool first = true;
        while (true) {
            ws();
            if (p == s.size()) {
                if (first) fail("empty state literal");
                break;
            }
            Scalar sgn = 1;
            if (eat("-"))
                sgn = -1;
            else if (eat("+"))
                ;
            else if (!first)
                fail("expected '+' or '-'");
            first = false;
            ws();
            Scalar coef = 1;
            if (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) {
                size_t q = p;
                while (p < s.size() && (std::isdigit(static_cast<unsigned char>(s[p])) || s[p] == '/')) ++p;
                coef = parse_scalar(s.substr(q, p - q));
                eat("*");
            }
            FockLabel l;
            while (eat("a(")) {
                size_t at = p;
                long n = integer();
                if (n >= 0) {
                    p = at;
                    fail("only creation modes a(-n) with n >= 1 may appear");
                }
                if (!eat(")")) fail("expected ')'");
                l.push_back(int(-n));
            }
            if (!eat("|0>")) fail("expected '|0>'");
            std::sort(l.begin(), l.end(), std::greater<int>());
            add_to(out, l, sgn * coef);
        }
        return out;
    }
};

}  // namespace

GradedVector parse_state(const std::string& s)
{
    StateParser ps{s};
    GradedVector v;
    v.c = ps.parse();
    return v;
}

DualVector parse_dual(const std::string& s)
{
    StateParser ps{s};
    DualVector v;
    v.c = ps.parse();
    return v;
}

}  // namespace fc
