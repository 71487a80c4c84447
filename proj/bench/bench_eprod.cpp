#include "fc/complex.hpp"

#include <benchmark/benchmark.h>

using namespace fc;

static ProductInput mixed()
{
    ProductInput p;
    p.phi = Correlator::e_element(GradedVector::basis({1}), 1);
    p.psi = Correlator::e_element(GradedVector::vacuum(), 2);
    p.x = {{GradedVector::basis({2}), zv(1)}};
    p.y = {{GradedVector::basis({1}), zv(2)}, {GradedVector::basis({1, 1}), zv(3)}};
    return p;
}

// level loop of the eps-product, serial reference against the OpenMP kernel
static void eps_product_levels(benchmark::State& st, bool parallel)
{
    VoaContext ctx;
    ctx.lmax = int(st.range(0));
    ctx.nmax = ctx.lmax + 2;
    ProductOptions opt;
    opt.parallel = parallel;
    const ProductInput p = mixed();
    const DualVector wp = DualVector::of({1});
    for (auto _ : st) benchmark::DoNotOptimize(eps_product(p, wp, ctx, opt));
}
static void BM_eps_product_serial(benchmark::State& st) { eps_product_levels(st, false); }
static void BM_eps_product_parallel(benchmark::State& st) { eps_product_levels(st, true); }
BENCHMARK(BM_eps_product_serial)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_eps_product_parallel)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

// delta^2 on one E-element over the weight <= 2 samples (OpenMP over samples)
static void BM_delta_squared(benchmark::State& st)
{
    VoaContext ctx;
    ctx.nmax = 5;
    ctx.lmax = 2;
    SampleSpace sp;
    for (int w = 0; w <= 2; ++w)
        for (auto& l : partitions(w)) {
            sp.states.push_back(GradedVector::basis(l));
            sp.duals.push_back(DualVector::of(l));
        }
    const int n = int(st.range(0));
    Cochain c = cochain_new(Correlator::e_element(GradedVector::basis({2}), n), n, 2, ctx);
    for (auto _ : st) benchmark::DoNotOptimize(check_vanishing(delta(delta(c)), sp, ctx));
}
BENCHMARK(BM_delta_squared)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
