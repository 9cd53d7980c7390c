// Timing comparison of the OpenMP kernels against their serial reference
// paths: sparse mat-vec and envelope region quadrature.

#include "fracprec/envelope.hpp"
#include "fracprec/fem.hpp"
#include "fracprec/mesh.hpp"
#include "fracprec/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double time_of(const std::function<void()>& fn, int reps) {
  fn();  // warmup
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  fracprec::apply_thread_env();
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("threads: %d\n\n", threads);
  std::printf("%-28s %12s %12s %8s\n", "kernel", "serial [s]", "parallel [s]", "speedup");

  // sparse mat-vec on a P2 stiffness matrix
  {
    auto mesh = std::make_shared<fracprec::Mesh2D>(fracprec::generate_crossed(192, 192, {0, 0, 1, 1}));
    auto space = fracprec::FunctionSpace::create(mesh, fracprec::Element::P2);
    auto a = fracprec::assemble_stiffness(space).matrix;
    fracprec::Vector x = fracprec::Vector::Ones(a.cols());
    volatile double sink = 0;
    double ts = time_of([&] { sink += a.apply_serial(x)[0]; }, 20);
    double tp = time_of([&] { sink += a.apply(x)[0]; }, 20);
    std::printf("%-28s %12.6f %12.6f %8.2f\n", "spmv (P2 stiffness)", ts, tp, ts / tp);
  }

  // envelope quadrature over the unit circle
  {
    auto curve = fracprec::PiecewiseCurve::from_segments(
        {fracprec::CurveSegment::arc({0, 0}, 1.0, 0.0, 2 * 3.14159265358979323846, true)});
    fracprec::EnvelopeDecomposition d(curve, 1e-3);
    auto v = [](double x, double y) { return x * x + std::sin(y); };
    auto one = [](double, double) { return 1.0; };
    volatile double sink = 0;
#ifdef _OPENMP
    int save = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    double ts = time_of([&] { sink += fracprec::trace_pair_eps(v, one, d, 64); }, 3);
#ifdef _OPENMP
    omp_set_num_threads(save);
#endif
    double tp = time_of([&] { sink += fracprec::trace_pair_eps(v, one, d, 64); }, 3);
    std::printf("%-28s %12.6f %12.6f %8.2f\n", "envelope quadrature", ts, tp, ts / tp);
  }
  return 0;
}
