#include <benchmark/benchmark.h>

#include "ptycho/fft.hpp"
#include "ptycho/recon.hpp"
#include "ptycho/rng.hpp"
#include "ptycho/sim.hpp"

using namespace ptycho;

namespace {

ComplexField random_field(Rng& rng, int rows, int cols) {
  ComplexField f(rows, cols);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = cdouble(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return f;
}

RealGrid random_sqrt_intensity(Rng& rng, int rows, int cols) {
  RealGrid g(rows, cols);
  for (auto& v : g.data) v = rng.uniform(0.0, 2.0);
  return g;
}

void bm_fft2(benchmark::State& state) {
  int n = int(state.range(0));
  Rng rng(17);
  ComplexField f = random_field(rng, n, n);
  benchmark::DoNotOptimize(fft2(f).data());  // warm the plan cache
  for (auto _ : state) {
    ComplexField g = fft2(f);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(bm_fft2)->Arg(64)->Arg(128)->Arg(256);

void bm_project_magnitude(benchmark::State& state) {
  Rng rng(18);
  ComplexField z = random_field(rng, 128, 128);
  RealGrid sqrt_i = random_sqrt_intensity(rng, 128, 128);
  benchmark::DoNotOptimize(project_magnitude(z, sqrt_i).data());
  for (auto _ : state) {
    ComplexField p = project_magnitude(z, sqrt_i);
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(bm_project_magnitude);

void bm_sirdr_exitwave(benchmark::State& state) {
  Rng rng(19);
  ComplexField object = random_field(rng, 128, 128);
  ComplexField probe = random_field(rng, 128, 128);
  ComplexField z_prev = random_field(rng, 128, 128);
  RealGrid sqrt_i = random_sqrt_intensity(rng, 128, 128);
  benchmark::DoNotOptimize(fft2(object).data());
  for (auto _ : state) {
    ExitWaveUpdate u =
        sirdr_exitwave_update(object, probe, z_prev, sqrt_i, 0.85, 0.1);
    benchmark::DoNotOptimize(u.psi.data());
  }
}
BENCHMARK(bm_sirdr_exitwave);

void bm_semi_implicit_update(benchmark::State& state) {
  Rng rng(20);
  ComplexField object = random_field(rng, 128, 128);
  ComplexField probe = random_field(rng, 128, 128);
  ComplexField psi = random_field(rng, 128, 128);
  for (auto _ : state) {
    ComplexField o = semi_implicit_object_update(object, probe, psi, 0.9);
    benchmark::DoNotOptimize(o.data());
  }
}
BENCHMARK(bm_semi_implicit_update);

// One full pass over a small noisy scan, per algorithm.
struct EpochCase {
  DiffractionStack stack;
  ReconInit init;
};

const EpochCase& epoch_case() {
  static const EpochCase c = [] {
    SimScene s = make_scene(blobs_amplitude(64, 64), blobs_phase(64, 64), 1.0,
                            64, 24.0, 20);
    EpochCase e;
    e.stack = add_poisson_noise(
        forward_diffract(s.object, s.probe, s.geometry), 1e6, 5);
    e.init.object = random_object(s.geometry.object_rows,
                                  s.geometry.object_cols, 1);
    e.init.probe = make_circular_probe(64, 24.0);
    return e;
  }();
  return c;
}

void bm_epoch(benchmark::State& state, Algorithm algorithm) {
  const EpochCase& c = epoch_case();
  AlgoParams p;
  p.algorithm = algorithm;
  p.sigma = 0.85;
  p.tau = 0.1;
  p.beta_obj = 0.9;
  p.beta_probe_start = 0.1;
  p.beta_probe_end = 0.1;
  p.epochs = 1;
  p.shuffle_seed = 3;
  RunOptions quiet{.trace_every = 0};
  benchmark::DoNotOptimize(
      run_reconstruction(c.stack, p, c.init, quiet).object.data());
  for (auto _ : state) {
    ReconState s = run_reconstruction(c.stack, p, c.init, quiet);
    benchmark::DoNotOptimize(s.object.data());
  }
}
BENCHMARK_CAPTURE(bm_epoch, epie, Algorithm::epie);
BENCHMARK_CAPTURE(bm_epoch, rpie, Algorithm::rpie);
BENCHMARK_CAPTURE(bm_epoch, sirdr, Algorithm::sirdr);

}  // namespace

BENCHMARK_MAIN();
