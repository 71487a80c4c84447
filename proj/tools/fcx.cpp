#include "fc/suites.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace fc;
namespace fs = std::filesystem;

namespace {

constexpr int EXIT_USAGE = 2;

void emit(const Json& j, const std::string& out)
{
    const std::string text = j.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw UsageError("cannot write " + out);
    f << text;
}

// "a(-1)|0>@z2"
std::pair<GradedVector, int> parse_insertion(const std::string& s)
{
    const size_t at = s.rfind('@');
    if (at == std::string::npos) throw UsageError("insertion '" + s + "': expected <state>@z<k>");
    const int v = var_index(s.substr(at + 1));
    if (v < 0 || v >= NZ) throw UsageError("insertion '" + s + "': bad position variable");
    try {
        return {parse_state(s.substr(0, at)), v};
    } catch (const MathError& e) {
        throw UsageError("insertion '" + s + "': " + e.what());
    }
}

template <class F>
auto parsed(const std::string& flag, const std::string& text, F f)
{
    try {
        return f(text);
    } catch (const MathError& e) {
        throw UsageError(flag + " '" + text + "': " + e.what());
    }
}

InsertionSpec parse_insertions(const std::vector<std::string>& xs)
{
    InsertionSpec r;
    for (auto& x : xs) r.push_back(parse_insertion(x));
    return r;
}

Scalar parse_lambda(const std::string& s)
{
    try {
        return parse_scalar(s);
    } catch (const std::exception& e) {
        throw UsageError("--lambda: " + std::string(e.what()));
    }
}

fs::path cache_dir()
{
    if (const char* d = std::getenv("FC_CACHE_DIR")) return d;
    if (const char* x = std::getenv("XDG_CACHE_HOME")) return fs::path(x) / "fcx";
    if (const char* h = std::getenv("HOME")) return fs::path(h) / ".cache" / "fcx";
    return {};
}

std::string fnv_hex(const std::string& s)
{
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream o;
    o << std::hex << h;
    return o.str();
}

struct Common {
    int nmax = 6, lmax = 4;
    std::string lambda = "1";
    unsigned seed = 0;
    std::string out;

    void add(CLI::App* a)
    {
        a->add_option("--nmax", nmax, "weight truncation N_max")->capture_default_str();
        a->add_option("--lmax", lmax, "eps truncation L_max")->capture_default_str();
        a->add_option("--lambda", lambda, "bilinear form normalization")->capture_default_str();
        a->add_option("--seed", seed, "seed for remixed bases")->capture_default_str();
        a->add_option("--out", out, "report path (default stdout)");
    }
    RunConfig config() const
    {
        RunConfig c;
        c.nmax = nmax;
        c.lmax = lmax;
        c.lambda = parse_lambda(lambda);
        c.seed = seed;
        c.out = out;
        c.validate();
        return c;
    }
};

int cmd_verify(const Common& com, const std::vector<std::string>& suites, const std::string& signs)
{
    RunConfig cfg = com.config();
    for (auto& s : suites) {
        std::stringstream ss(s);
        std::string part;
        while (std::getline(ss, part, ','))
            if (!part.empty()) cfg.suites.push_back(part);
    }
    if (signs != "default" && signs != "printed") throw UsageError("--sign-convention: default or printed");
    cfg.printed_signs = signs == "printed";
    cfg.validate();
    Json rep = run_selection(cfg);
    emit(rep, cfg.out);
    return all_pass(rep) ? 0 : 1;
}

int cmd_product(const Common& com, const std::string& phi_s, const std::string& psi_s,
                const std::vector<std::string>& xs, const std::vector<std::string>& ys, const std::string& dual_s,
                bool sew, bool no_cache)
{
    RunConfig cfg = com.config();
    ProductInput in;
    in.phi = parsed("--phi", phi_s, parse_correlator);
    in.psi = parsed("--psi", psi_s, parse_correlator);
    in.x = parse_insertions(xs);
    in.y = parse_insertions(ys);
    if (int(in.x.size()) != in.phi.n) throw UsageError("--ins-x: " + in.phi.desc() + " needs " + std::to_string(in.phi.n));
    if (int(in.y.size()) != in.psi.n) throw UsageError("--ins-y: " + in.psi.desc() + " needs " + std::to_string(in.psi.n));
    DualVector wp = parsed("--dual", dual_s, parse_dual);

    Json req;
    req["phi"] = in.phi.desc();
    req["psi"] = in.psi.desc();
    req["x"] = Json::array();
    for (auto& [v, z] : in.x) req["x"].push_back(v.str() + "@" + var_name(z));
    req["y"] = Json::array();
    for (auto& [v, z] : in.y) req["y"].push_back(v.str() + "@" + var_name(z));
    req["dual"] = wp.str();
    req["sewn"] = sew;
    req["params"] = cfg.params();

    fs::path cached;
    if (!no_cache && !cache_dir().empty()) cached = cache_dir() / ("product-" + fnv_hex(req.dump()) + ".json");
    Json rep;
    if (!cached.empty() && fs::exists(cached)) {
        std::ifstream f(cached);
        rep = Json::parse(f);
    } else {
        const VoaContext ctx = cfg.ctx();
        ExclusionMap em = merge_params([&] {
            std::vector<int> v;
            for (auto& p : in.x) v.push_back(p.second);
            return v;
        }(), [&] {
            std::vector<int> v;
            for (auto& p : in.y) v.push_back(p.second);
            return v;
        }());
        EpsSeries s = eps_product(in, wp, ctx, {}, &em);
        if (sew) s = sew_substitute(s, ZETA2);
        rep = req;
        rep["orders"] = Json::array();
        rep["pole_certificate"] = Json::array();
        for (int l = 0; l <= s.lmax; ++l) {
            rep["orders"].push_back({{"order", l}, {"value", s.coeff(l).str()}});
            EpsSeries one(s.lmax);
            one.add_to(l, s.coeff(l));
            CheckReport r = product_pole_scan(one, in.x, in.y, false);
            Json row{{"order", l}, {"ok", r.ok}};
            if (!r.ok) row["detail"] = r.detail;
            rep["pole_certificate"].push_back(row);
        }
        if (!cached.empty()) {
            std::error_code ec;
            fs::create_directories(cached.parent_path(), ec);
            std::ofstream f(cached, std::ios::binary);
            if (f) f << rep.dump(2) << "\n";
        }
    }
    emit(rep, cfg.out);
    bool ok = true;
    for (auto& row : rep["pole_certificate"])
        if (!row["ok"].get<bool>()) {
            std::cerr << "certificate failure: " << row["detail"].get<std::string>() << "\n";
            ok = false;
        }
    return ok ? 0 : 1;
}

int cmd_gv(const Common& com, const std::string& phi_s)
{
    RunConfig cfg = com.config();
    const VoaContext ctx = cfg.ctx();
    Correlator c = parsed("--phi", phi_s, parse_correlator);
    if (c.n != 1) throw UsageError("--phi: a class representative needs arity 1");
    Cochain phi = cochain_new(c, 1, 2, ctx);
    const GradedVector A1 = GradedVector::basis({1}), A2 = GradedVector::basis({2}), AA = GradedVector::basis({1, 1});
    SampleSpace sp{{A1, A2, AA},
                   {DualVector::of({}), DualVector::of({1}), DualVector::of({2}), DualVector::of({1, 1})}};
    Json rep;
    rep["phi"] = c.desc();
    rep["params"] = cfg.params();
    rep["class"] = class_json(gv_class(phi, sp, ctx));
    emit(rep, cfg.out);
    return 0;
}

int cmd_expand(const std::string& f_s, const std::string& var, const std::string& about, int order,
               const std::string& out)
{
    RatFunc f = parsed("--f", f_s, parse_ratfunc);
    const int v = var_index(var);
    if (v < 0) throw UsageError("--var: unknown variable " + var);
    int other = -1;
    if (!about.empty()) {
        other = var_index(about);
        if (other < 0) throw UsageError("--about: unknown variable " + about);
    }
    LaurentExpansion e = laurent_expand(f, v, order, other);
    Json rep;
    rep["f"] = f.str();
    rep["var"] = var;
    rep["about"] = about.empty() ? Json(nullptr) : Json(about);
    rep["lowest"] = e.lowest;
    rep["orders"] = Json::array();
    for (int k = e.lowest; k <= e.K; ++k)
        if (!e.at(k).is_zero()) rep["orders"].push_back({{"order", k}, {"coeff", e.at(k).str()}});
    emit(rep, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"exact free-boson cochain engine"};
    app.require_subcommand(1);

    Common vc, pc, gc;
    std::vector<std::string> suites;
    std::string signs = "default";
    auto* verify = app.add_subcommand("verify", "run invariant suites");
    vc.add(verify);
    verify->add_option("--suite", suites,
                       "delta2, leibniz, shuffle, lproperties, product-closure, gv, oracle or all; repeatable");
    verify->add_option("--sign-convention", signs, "default or printed exceptional coboundary sign")
        ->capture_default_str();

    std::string phi_s, psi_s, dual_s = "|0>";
    std::vector<std::string> xs, ys;
    bool sew = false, no_cache = false;
    auto* product = app.add_subcommand("product", "eps-product of two E-elements");
    pc.add(product);
    product->add_option("--phi", phi_s, "first factor, E[<state>; n]")->required();
    product->add_option("--psi", psi_s, "second factor, E[<state>; n]")->required();
    product->add_option("--ins-x", xs, "insertions of the first factor, <state>@z<k>");
    product->add_option("--ins-y", ys, "insertions of the second factor, <state>@z<k>");
    product->add_option("--dual", dual_s, "dual vector w'")->capture_default_str();
    product->add_flag("--sew", sew, "substitute zeta2 = eps/zeta1");
    product->add_flag("--no-cache", no_cache, "bypass the result cache");

    std::string gphi = "E[|0>; 1]";
    auto* gvc = app.add_subcommand("gv", "product-type class [(delta Phi).Phi]");
    gc.add(gvc);
    gvc->add_option("--phi", gphi, "cochain in C^1_2, E[<state>; 1]")->capture_default_str();

    std::string f_s, var = "z1", about, eout;
    int order = 4;
    auto* expand = app.add_subcommand("expand", "Laurent expansion of a rational function");
    expand->add_option("--f", f_s, "rational function")->required();
    expand->add_option("--var", var, "expansion variable")->capture_default_str();
    expand->add_option("--about", about, "expand in var - about instead of var");
    expand->add_option("--order", order, "highest order kept")->capture_default_str();
    expand->add_option("--out", eout, "report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return EXIT_USAGE;
    }

    try {
        if (*verify) return cmd_verify(vc, suites, signs);
        if (*product) return cmd_product(pc, phi_s, psi_s, xs, ys, dual_s, sew, no_cache);
        if (*gvc) return cmd_gv(gc, gphi);
        if (*expand) return cmd_expand(f_s, var, about, order, eout);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return EXIT_USAGE;
    } catch (const MathError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return EXIT_USAGE;
}
