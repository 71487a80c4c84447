#include "fc/complex.hpp"

#include <algorithm>
#include <exception>

namespace fc {

static std::vector<Arg> singletons(const InsertionSpec& ins)
{
    std::vector<Arg> a;
    for (auto& i : positioned(ins)) a.push_back({i});
    return a;
}

static Arg concat(Arg a, const Arg& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

static void add_scaled(CVal& out, const CVal& v, const Scalar& s)
{
    if (s == 0) return;
    for (auto t : v.e) {
        t.c *= s;
        out.e.push_back(std::move(t));
    }
    for (auto p : v.p) {
        p.c *= s;
        out.p.push_back(std::move(p));
    }
}

NodeP e_node(const Correlator& c)
{
    auto n = std::make_shared<Node>();
    n->kind = Node::E;
    n->arity = c.n;
    n->corr = c;
    return n;
}

NodeP fn_node(const Evaluator& f, int arity)
{
    auto n = std::make_shared<Node>();
    n->kind = Node::FN;
    n->arity = arity;
    n->fn = f;
    return n;
}

NodeP lin_node(std::vector<std::pair<Scalar, NodeP>> terms)
{
    if (terms.empty()) throw MathError("empty linear combination");
    for (auto& [c, t] : terms)
        if (t->arity != terms[0].second->arity) throw MathError("arity mismatch");
    auto n = std::make_shared<Node>();
    n->kind = Node::LIN;
    n->arity = terms[0].second->arity;
    n->terms = std::move(terms);
    return n;
}

NodeP delta_node(const NodeP& a, const DeltaSigns& s)
{
    auto n = std::make_shared<Node>();
    n->kind = Node::DELTA;
    n->arity = a->arity + 1;
    n->a = a;
    n->signs = s;
    return n;
}

NodeP delta_ex_node(const NodeP& a, bool printed_sign)
{
    if (a->arity != 2) throw MathError("arity mismatch");
    auto n = std::make_shared<Node>();
    n->kind = Node::DELTA_EX;
    n->arity = 3;
    n->a = a;
    n->printed_ex_sign = printed_sign;
    return n;
}

NodeP product_node(const NodeP& a, const NodeP& b, std::vector<int> slots_a, std::vector<int> slots_b)
{
    if (int(slots_a.size()) != a->arity || int(slots_b.size()) != b->arity) throw MathError("arity mismatch");
    int top = -1;
    for (int s : slots_a) top = std::max(top, s);
    for (int s : slots_b) top = std::max(top, s);
    auto n = std::make_shared<Node>();
    n->kind = Node::PRODUCT;
    n->arity = top + 1;
    n->a = a;
    n->b = b;
    n->slots_a = std::move(slots_a);
    n->slots_b = std::move(slots_b);
    return n;
}

bool has_product(const NodeP& n)
{
    switch (n->kind) {
    case Node::PRODUCT: return true;
    case Node::LIN:
        for (auto& [c, t] : n->terms)
            if (has_product(t)) return true;
        return false;
    case Node::DELTA:
    case Node::DELTA_EX: return has_product(n->a);
    default: return false;
    }
}

static std::vector<Arg> merge_pair(const std::vector<Arg>& args, int i)
{
    std::vector<Arg> out(args.begin(), args.begin() + i);
    out.push_back(concat(args[i], args[i + 1]));
    out.insert(out.end(), args.begin() + i + 2, args.end());
    return out;
}

CVal node_value(const NodeP& n, const std::vector<Arg>& args, const Arg& front, const Arg& back)
{
    if (int(args.size()) != n->arity) throw MathError("arity mismatch");
    CVal out;
    switch (n->kind) {
    case Node::E:
    case Node::FN: {
        EVal e = n->kind == Node::E ? evaluator_of(n->corr)(args) : n->fn(args);
        for (auto& t : e) {
            t.ops = concat(concat(front, t.ops), back);
            out.e.push_back(std::move(t));
        }
        return out;
    }
    case Node::LIN:
        for (auto& [c, t] : n->terms) add_scaled(out, node_value(t, args, front, back), c);
        return out;
    case Node::DELTA: {
        const int k = n->a->arity;
        const DeltaSigns& s = n->signs;
        std::vector<Arg> rest(args.begin() + 1, args.end());
        add_scaled(out, node_value(n->a, rest, concat(front, args[0]), back), s.front);
        for (int i = 1; i <= k; ++i)
            add_scaled(out, node_value(n->a, merge_pair(args, i - 1), front, back), (i % 2 ? -1 : 1) * s.middle);
        std::vector<Arg> head(args.begin(), args.end() - 1);
        add_scaled(out, node_value(n->a, head, front, concat(args[k], back)), ((k + 1) % 2 ? -1 : 1) * s.back);
        return out;
    }
    case Node::DELTA_EX: {
        add_scaled(out, node_value(n->a, {args[1], args[2]}, concat(front, args[0]), back), 1);
        add_scaled(out, node_value(n->a, merge_pair(args, 0), front, back), -1);
        add_scaled(out, node_value(n->a, merge_pair(args, 1), front, back), 1);
        add_scaled(out, node_value(n->a, {args[0], args[1]}, front, concat(args[2], back)),
                   n->printed_ex_sign ? 1 : -1);
        return out;
    }
    case Node::PRODUCT: {
        std::vector<Arg> xa, xb;
        for (int s : n->slots_a) xa.push_back(args[s]);
        for (int s : n->slots_b) xb.push_back(args[s]);
        CVal a = node_value(n->a, xa, front, {}), b = node_value(n->b, xb, {}, back);
        if (!a.p.empty() || !b.p.empty()) throw MathError("nested products are not supported");
        out.p.push_back({1, std::move(a.e), std::move(b.e)});
        return out;
    }
    }
    return out;
}

EpsSeries pair_value(const DualVector& wp, const CVal& v, const VoaContext& ctx)
{
    EpsSeries s(ctx.lmax);
    s.add_to(0, pair(wp, v.e));
    ProductOptions opt;
    opt.parallel = false;
    // bilinearity: equal factor pairs are combined before sewing
    std::vector<PTerm> merged;
    for (auto& p : v.p) {
        PTerm q{p.c, simplify(p.a), simplify(p.b)};
        if (q.a.empty() || q.b.empty()) continue;
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const PTerm& m) { return same_value(m.a, q.a) && same_value(m.b, q.b); });
        if (it == merged.end())
            merged.push_back(std::move(q));
        else
            it->c += q.c;
    }
    std::vector<std::vector<RatFunc>> parts(ctx.lmax + 1);
    parts[0].push_back(s.coeff(0));
    for (auto& p : merged) {
        if (p.c == 0) continue;
        EpsSeries e = eps_product(p.a, p.b, wp, ctx, opt);
        for (auto& [l, f] : e.c)
            if (l <= ctx.lmax) parts[l].push_back(f * p.c);
    }
    EpsSeries out(ctx.lmax);
    for (int l = 0; l <= ctx.lmax; ++l) out.add_to(l, sum(parts[l]));
    return out;
}

CertOptions default_cert_options()
{
    CertOptions o;
    o.states = {parse_state("a(-1)|0>"), parse_state("a(-2)|0>")};
    o.duals = {DualVector::of({}), DualVector::of({1})};
    return o;
}

static InsertionSpec cycled(const std::vector<GradedVector>& states, int n)
{
    InsertionSpec ins;
    for (int i = 0; i < n; ++i) ins.push_back({states[i % states.size()], zv(i + 1)});
    return ins;
}

static void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    if (parts == 0) {
        if (total == 0) out.push_back(cur);
        return;
    }
    for (int g = 1; g <= total - (parts - 1); ++g) {
        cur.push_back(g);
        compositions(total - g, parts - 1, cur, out);
        cur.pop_back();
    }
}

static Evaluator plain_evaluator(const NodeP& body)
{
    return [body](const std::vector<Arg>& args) { return node_value(body, args).e; };
}

// first failing certificate, empty when all pass
static std::string certify_plain(const NodeP& body, int n, int m, const VoaContext& ctx, const CertOptions& opt)
{
    if (n == 0) return "";
    Evaluator ev = plain_evaluator(body);
    const std::vector<int> zetas = {zv(17), zv(18), zv(19), zv(20)};
    if (n > int(zetas.size())) throw MathError("arity too large for the certificate suite");
    for (auto& wp : opt.duals) {
        InsertionSpec ins = cycled(opt.states, n);
        RatFunc f = pair(wp, ev(singletons(ins)));
        CheckReport pr = check_poles(f, ins, true);
        if (!pr.ok) return "poles: " + pr.detail;
    }
    for (int mm = 1; mm <= m; ++mm) {
        InsertionSpec ins = cycled(opt.states, n + mm);
        InsertionSpec front(ins.begin(), ins.begin() + mm), inner(ins.begin() + mm, ins.end());
        std::vector<std::vector<int>> groups;
        std::vector<int> cur;
        compositions(n + mm, n, cur, groups);
        for (auto& wp : opt.duals) {
            auto j = composability_J(ev, n, front, inner, wp, ctx);
            if (!j.ok) return "composability J with " + std::to_string(mm) + " operators: " + j.detail;
            for (auto& g : groups) {
                auto i = composability_I(ev, n, g, ins, std::vector<int>(zetas.begin(), zetas.begin() + n), wp, ctx);
                if (!i.ok) return "composability I with " + std::to_string(mm) + " operators: " + i.detail;
            }
        }
    }
    return "";
}

Cochain cochain_new(const NodeP& body, int n, int m, const VoaContext& ctx, const CertOptions& opt)
{
    if (body->arity != n) throw MathError("arity mismatch");
    if (m < 0) throw MathError("negative composability budget");
    if (has_product(body)) throw MathError("product bodies are built by cochain_product");
    Cochain c;
    c.body = body;
    c.n = n;
    c.m = m;
    std::string why;
    try {
        why = certify_plain(body, n, m, ctx, opt);
    } catch (const MathError& e) {
        why = e.what();
    }
    c.certified = why.empty();
    c.cert_detail = why;
    if (!why.empty() && opt.strict) throw MathError("composability failure: " + why);
    return c;
}

Cochain cochain_new(const Correlator& body, int n, int m, const VoaContext& ctx, const CertOptions& opt)
{
    return cochain_new(e_node(body), n, m, ctx, opt);
}

Cochain delta(const Cochain& phi, const DeltaSigns& s)
{
    if (phi.m < 1) throw MathError("no composability budget");
    Cochain c = phi;
    c.body = delta_node(phi.body, s);
    c.n = phi.n + 1;
    c.m = phi.m - 1;
    return c;
}

EpsSeries evaluate(const Cochain& c, const DualVector& wp, const InsertionSpec& ins, const VoaContext& ctx)
{
    if (int(ins.size()) != c.n) throw MathError("arity mismatch");
    return pair_value(wp, node_value(c.body, singletons(ins)), ctx);
}

ExceptionalCochain check_exceptional(const Cochain& phi, const InsertionSpec& ins, const DualVector& wp,
                                     const VoaContext& ctx, bool printed_sign)
{
    if (phi.n != 2 || ins.size() != 3) throw MathError("arity mismatch");
    if (has_product(phi.body)) throw MathError("product bodies are not certified here");
    ExceptionalCochain ex;
    ex.c = phi;
    Evaluator ev = plain_evaluator(phi.body);
    std::vector<Arg> a = singletons(ins);
    auto j = composability_J(ev, 2, {ins[0]}, {ins[1], ins[2]}, wp, ctx);
    auto i = composability_I(ev, 2, {1, 2}, ins, {zv(17), zv(18)}, wp, ctx);
    RatFunc m12 = pair(wp, node_value(phi.body, merge_pair(a, 0)).e);
    RatFunc back = pair(wp, node_value(phi.body, {a[0], a[1]}, {}, a[2]).e);
    ex.g1 = j.value + i.value;
    ex.g2 = back * Scalar(printed_sign ? 1 : -1) - m12;
    CheckReport rep;
    if (!j.ok) rep.fail("G1 front term: " + j.detail);
    if (!i.ok) rep.fail("G1 merged term: " + i.detail);
    for (auto* g : {&ex.g1, &ex.g2}) {
        CheckReport p = check_poles(*g, ins, true);
        if (!p.ok) rep.fail(std::string(g == &ex.g1 ? "G1" : "G2") + " poles: " + p.detail);
    }
    RatFunc full = pair(wp, node_value(delta_ex_node(phi.body, printed_sign), a).e);
    if (ex.g1 + ex.g2 != full) rep.fail("G1 + G2 differs from the four-term form");
    ex.certified = rep.ok;
    ex.detail = rep.detail;
    return ex;
}

Cochain delta_ex(const ExceptionalCochain& phi, bool printed_sign)
{
    if (!phi.certified) throw MathError("uncertified input");
    Cochain c = phi.c;
    c.body = delta_ex_node(phi.c.body, printed_sign);
    c.n = 3;
    c.m = 0;
    return c;
}

static std::vector<int> range(int from, int count)
{
    std::vector<int> v(count);
    for (int i = 0; i < count; ++i) v[i] = from + i;
    return v;
}

Cochain cochain_product(const Cochain& phi, const Cochain& psi, int r, int t, const VoaContext& ctx, bool strict)
{
    if (r < 0 || r > std::min(phi.n, psi.n)) throw MathError("shared arguments exceed the arities");
    if (t < 0 || t > std::min(phi.m, psi.m)) throw MathError("common operators exceed the budgets");
    Cochain c;
    c.body = product_node(phi.body, psi.body, range(0, phi.n), range(phi.n - r, psi.n));
    c.n = phi.n + psi.n - r;
    c.m = phi.m + psi.m - t;
    c.r = r;
    c.t = t;
    CheckReport rep;
    if (!phi.certified || !psi.certified) rep.fail("uncertified factor");
    const CertOptions opt = default_cert_options();
    InsertionSpec ins = cycled(opt.states, c.n);
    InsertionSpec x(ins.begin(), ins.begin() + phi.n), y(ins.begin() + phi.n - r, ins.end());
    for (auto& wp : opt.duals) {
        if (!rep.ok) break;
        CheckReport p = product_pole_scan(evaluate(c, wp, ins, ctx), x, y, true);
        if (!p.ok) rep.fail("product poles: " + p.detail);
    }
    c.certified = rep.ok;
    c.cert_detail = rep.detail;
    if (!rep.ok && strict) throw MathError("certificate failure: " + rep.detail);
    return c;
}

Cochain commutator(const Cochain& phi, const Cochain& psi, int r, int t, const VoaContext& ctx)
{
    Cochain ab = cochain_product(phi, psi, r, t, ctx);
    NodeP ba = product_node(psi.body, phi.body, range(0, psi.n), range(psi.n - r, phi.n));
    Cochain c = ab;
    c.body = lin_node({{1, ab.body}, {-1, ba}});
    return c;
}

std::string Sample::id() const
{
    std::string s = "w'=" + wp.str();
    for (auto& [v, z] : ins) s += "; " + v.str() + "@" + var_name(z);
    return s;
}

std::vector<Sample> samples(int n, const SampleSpace& sp)
{
    std::vector<Sample> out;
    std::vector<size_t> idx(n, 0);
    for (auto& wp : sp.duals) {
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            Sample s{wp, {}};
            for (int i = 0; i < n; ++i) s.ins.push_back({sp.states[idx[i]], zv(i + 1)});
            out.push_back(std::move(s));
            int k = n - 1;
            while (k >= 0 && ++idx[k] == sp.states.size()) idx[k--] = 0;
            if (k < 0) break;
        }
    }
    return out;
}

// first nonzero difference over the samples, deterministic in sample order
static IdentityReport compare_on(const Cochain& a, const Cochain* b, const SampleSpace& sp, const VoaContext& ctx)
{
    if (b && a.n != b->n) throw MathError("arity mismatch");
    std::vector<Sample> ss = samples(a.n, sp);
    std::vector<std::string> fail(ss.size());
    std::vector<std::exception_ptr> err(ss.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t i = 0; i < ss.size(); ++i) {
        try {
            EpsSeries d = evaluate(a, ss[i].wp, ss[i].ins, ctx);
            if (b) d = d - evaluate(*b, ss[i].wp, ss[i].ins, ctx);
            for (int l = 0; l <= ctx.lmax; ++l)
                if (!d.coeff(l).is_zero()) {
                    fail[i] = ss[i].id() + ", eps^" + std::to_string(l) + ": " + d.coeff(l).str();
                    break;
                }
        } catch (...) {
            err[i] = std::current_exception();
        }
    }
    IdentityReport rep;
    rep.cases = int(ss.size());
    for (size_t i = 0; i < ss.size(); ++i) {
        if (err[i]) std::rethrow_exception(err[i]);
        if (!fail[i].empty() && rep.ok) {
            rep.ok = false;
            rep.detail = fail[i];
        }
    }
    return rep;
}

IdentityReport check_vanishing(const Cochain& c, const SampleSpace& sp, const VoaContext& ctx)
{
    return compare_on(c, nullptr, sp, ctx);
}

IdentityReport check_equal(const Cochain& a, const Cochain& b, const SampleSpace& sp, const VoaContext& ctx)
{
    return compare_on(a, &b, sp, ctx);
}

LeibnizReport leibniz_check(const Cochain& phi, const Cochain& psi, const SampleSpace& sp, const VoaContext& ctx)
{
    if (phi.m < 1 || psi.m < 1) throw MathError("no composability budget");
    Cochain lhs = delta(cochain_product(phi, psi, 0, 0, ctx));
    Cochain a = cochain_product(delta(phi), psi, 0, 0, ctx);
    Cochain b = cochain_product(phi, delta(psi), 0, 0, ctx);
    if (a.n != b.n || a.m != b.m) throw MathError("right-hand terms in different spaces");
    Cochain rhs = a;
    rhs.body = lin_node({{1, a.body}, {phi.n % 2 ? -1 : 1, b.body}});
    LeibnizReport rep;
    rep.lhs_bidegree = {lhs.n, lhs.m};
    rep.rhs_bidegree = {rhs.n, rhs.m};
    rep.id = check_equal(lhs, rhs, sp, ctx);
    return rep;
}

IdentityReport orthogonality_check(const Cochain& phi, const Cochain& psi, const SampleSpace& sp,
                                   const VoaContext& ctx)
{
    return check_vanishing(commutator(phi, delta(psi), 0, 0, ctx), sp, ctx);
}

ClassRep gv_class(const Cochain& phi, const SampleSpace& sp, const VoaContext& ctx)
{
    if (phi.n != 1 || phi.m < 2) throw MathError("class representatives need a cochain in C^1_2");
    ClassRep out;
    out.rep = commutator(delta(phi), phi, 1, 1, ctx);
    out.closed = check_vanishing(delta(out.rep), sp, ctx);
    const std::vector<std::pair<std::string, std::pair<long, long>>> points = {{"z=(2,3)", {2, 3}},
                                                                                 {"z=(5,7)", {5, 7}}};
    for (auto& s : samples(out.rep.n, sp)) {
        EpsSeries v = evaluate(out.rep, s.wp, s.ins, ctx);
        for (int l = 0; l <= ctx.lmax && !out.witness; ++l) {
            const RatFunc& f = v.coeff(l);
            if (f.is_zero()) continue;
            for (auto& [name, pt] : points) {
                RatFunc g;
                try {
                    g = substitute(f, {{zv(1), RatFunc(pt.first)}, {zv(2), RatFunc(pt.second)}});
                } catch (const MathError&) {
                    continue;
                }
                if (!g.is_zero()) {
                    out.witness = Witness{s.id(), l, name, g.str()};
                    break;
                }
            }
        }
        if (out.witness) break;
    }
    out.status = out.witness ? "nonvanishing" : "vanishing at truncation";
    return out;
}

// values of every eps-coefficient at fixed rational points, one entry per
// (sample, order, point)
static std::vector<Scalar> sample_vector(const Cochain& c, const std::vector<Sample>& ss, const VoaContext& ctx)
{
    const std::vector<std::vector<long>> pts = {{2, 3, 5, 7, 11}, {3, 7, 13, 17, 19}, {5, 11, 2, 23, 29}};
    std::vector<Scalar> out;
    for (auto& s : ss) {
        EpsSeries v = evaluate(c, s.wp, s.ins, ctx);
        for (int l = 0; l <= ctx.lmax; ++l)
            for (size_t p = 0; p < pts.size(); ++p) {
                std::map<int, RatFunc> at = {{ZETA1, RatFunc(frac(1, 2 + long(p)))}, {ZETA2, RatFunc(frac(1, 5 + long(p)))}};
                for (int i = 0; i < c.n; ++i) at[zv(i + 1)] = RatFunc(pts[p][i % pts[p].size()] + long(i / 5) * 31);
                RatFunc g = substitute(v.coeff(l), at);
                if (!g.is_poly() || (!g.num.is_const() && !g.is_zero())) throw MathError("sample point left variables");
                out.push_back(g.is_zero() ? Scalar(0) : g.num.const_value() / g.den.const_value());
            }
    }
    return out;
}

static std::string fnv_hex(const std::string& s)
{
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

CohomologyReport cohomology_predicates(const Cochain& phi, const SampleSpace& sp, const VoaContext& ctx, int n_gen)
{
    CohomologyReport out;
    out.closed = phi.m >= 1 && check_vanishing(delta(phi), sp, ctx).ok;
    std::vector<Sample> ss = samples(phi.n, sp);
    std::vector<Scalar> target = sample_vector(phi, ss, ctx);
    std::vector<Cochain> gens;
    if (phi.n >= 1)
        for (int w = 0; w <= n_gen; ++w)
            for (auto& l : partitions(w)) {
                Cochain g;
                g.body = e_node(Correlator::e_element(GradedVector::basis(l), phi.n - 1));
                g.n = phi.n - 1;
                g.m = phi.m + 1;
                g.certified = true;
                gens.push_back(delta(g));
            }
    // reduced row echelon form of the generator vectors, tracking combinations
    const size_t G = gens.size(), D = target.size();
    std::vector<std::vector<Scalar>> rows, combo;
    std::vector<size_t> pivots;
    for (size_t g = 0; g < G; ++g) {
        std::vector<Scalar> r = sample_vector(gens[g], ss, ctx), k(G, 0);
        k[g] = 1;
        for (size_t p = 0; p < rows.size(); ++p)
            if (r[pivots[p]] != 0) {
                Scalar f = r[pivots[p]];
                for (size_t d = 0; d < D; ++d) r[d] -= f * rows[p][d];
                for (size_t j = 0; j < G; ++j) k[j] -= f * combo[p][j];
            }
        size_t piv = 0;
        while (piv < D && r[piv] == 0) ++piv;
        if (piv == D) continue;
        Scalar inv = 1 / r[piv];
        for (auto& x : r) x *= inv;
        for (auto& x : k) x *= inv;
        for (size_t p = 0; p < rows.size(); ++p)
            if (rows[p][piv] != 0) {
                Scalar f = rows[p][piv];
                for (size_t d = 0; d < D; ++d) rows[p][d] -= f * r[d];
                for (size_t j = 0; j < G; ++j) combo[p][j] -= f * k[j];
            }
        rows.push_back(r);
        combo.push_back(k);
        pivots.push_back(piv);
    }
    std::vector<Scalar> red = target, coef(G, 0);
    for (size_t p = 0; p < rows.size(); ++p) {
        Scalar f = red[pivots[p]];
        if (f == 0) continue;
        for (size_t d = 0; d < D; ++d) red[d] -= f * rows[p][d];
        for (size_t j = 0; j < G; ++j) coef[j] += f * combo[p][j];
    }
    std::string key;
    bool zero = true;
    for (auto& x : red) {
        key += scalar_str(x) + ",";
        zero = zero && x == 0;
    }
    out.fingerprint = zero ? "exact" : fnv_hex(key);
    if (zero && phi.n >= 1) {
        // confirm the combination symbolically on the samples
        std::vector<std::pair<Scalar, NodeP>> terms = {{1, phi.body}};
        for (size_t j = 0; j < G; ++j)
            if (coef[j] != 0) terms.push_back({-coef[j], gens[j].body});
        Cochain diff = phi;
        diff.body = lin_node(terms);
        if (check_vanishing(diff, sp, ctx).ok) out.exact_witness = coef;
    }
    return out;
}

CheckReport coordinate_canonicity(const ProductInput& in, const DualVector& wp, const Scalar& a2, bool rep,
                                  const VoaContext& ctx)
{
    const CoordChange f = solve_exp_coeffs({0, 1, a2}, ctx.nmax);
    auto moved = [&](const InsertionSpec& ins) {
        InsertionSpec out;
        for (auto& [v, z] : ins) {
            GradedVector u;
            for (int w = 0; w <= v.max_weight(); ++w) {
                GradedVector c = v.component(w);
                if (c.is_zero()) continue;
                GradedVector pc = rep ? apply_Pf_rep(ctx, f, c) : apply_Pf(ctx, f, c);
                Scalar tag = 1;
                for (int k = 0; k < w; ++k) tag /= f.beta[0];
                u += pc * tag;
            }
            out.push_back({u, z});
        }
        return out;
    };
    ProductInput q = in;
    q.x = moved(in.x);
    q.y = moved(in.y);
    CheckReport r;
    if (evaluate(in.phi, wp, in.x) != evaluate(q.phi, wp, q.x)) r.fail("first correlator moved");
    if (evaluate(in.psi, wp, in.y) != evaluate(q.psi, wp, q.y)) r.fail("second correlator moved");
    EpsSeries a = eps_product(in, wp, ctx), b = eps_product(q, wp, ctx);
    for (int l = 0; l <= ctx.lmax; ++l)
        if (a.coeff(l) != b.coeff(l)) {
            r.fail("product moved at eps^" + std::to_string(l));
            break;
        }
    return r;
}

}  // namespace fc
