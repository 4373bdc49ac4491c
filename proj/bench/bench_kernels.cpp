// Serial vs OpenMP MLP forward/backward on the GAN network shapes.

#include "cgd/gan.hpp"
#include "cgd/kernels.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>

using namespace cgd;

namespace {

double seconds_per_call(int reps, auto&& fn) {
  fn();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MLP kernel benchmark"};
  int reps = 50;
  bool full = false;
  std::vector<long> batches{64, 256, 1024};
  app.add_option("--reps", reps, "repetitions per measurement");
  app.add_flag("--full", full, "use the 4x128 networks");
  app.add_option("--batch", batches, "batch sizes");
  CLI11_PARSE(app, argc, argv);

  const GanProblem prob = full ? GanProblem::full_scale() : GanProblem::desk_scale();
  std::printf("threads=%d\n", omp_get_max_threads());
  std::printf("%-14s %6s %12s %12s %8s %10s\n", "net", "batch", "serial_us", "openmp_us",
              "speedup", "max_diff");
  std::mt19937_64 rng(0);
  for (const auto* spec : {&prob.generator, &prob.discriminator}) {
    const Vector w = init_mlp_params(*spec, 1);
    for (long b : batches) {
      const Matrix x = sample_noise(spec->input_dim(), b, rng);
      const Matrix gout = Matrix::Ones(spec->output_dim(), b);
      double diff = 0.0;
      auto run = [&](kernels::Backend backend, Vector& grad) {
        kernels::ForwardCache cache;
        kernels::forward(*spec, w.data(), x, &cache, backend);
        grad.setZero();
        Matrix gin;
        kernels::backward(*spec, w.data(), cache, gout, grad.data(), &gin, backend);
      };
      Vector gs(spec->num_params()), go(spec->num_params());
      const double ts = seconds_per_call(reps, [&] { run(kernels::Backend::Serial, gs); });
      const double to = seconds_per_call(reps, [&] { run(kernels::Backend::OpenMP, go); });
      diff = (gs - go).cwiseAbs().maxCoeff();
      std::printf("%-14s %6ld %12.1f %12.1f %8.2f %10.2e\n",
                  spec == &prob.generator ? "generator" : "discriminator", b, ts * 1e6, to * 1e6,
                  ts / to, diff);
    }
  }
  return 0;
}
