// Compares the OpenMP kernels against the serial reference implementations
// on the project's hot loops and checks that results are bit-identical.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gal/dynamics.hpp"
#include "gal/measures.hpp"
#include "gal/parallel.hpp"
#include "gal/rng.hpp"

using namespace gal;

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct BenchResult {
  double serial_ms = 0.0;
  double parallel_ms = 0.0;
  bool identical = false;
};

template <typename SerialFn, typename ParallelFn, typename Equal>
BenchResult bench(const std::string& name, SerialFn&& serial, ParallelFn&& parallel,
                  Equal&& equal, int reps) {
  BenchResult r;
  auto rs = serial();  // warm-up + reference
  double t0 = now_ms();
  for (int i = 0; i < reps; ++i) rs = serial();
  r.serial_ms = (now_ms() - t0) / reps;
  auto rp = parallel();
  double t1 = now_ms();
  for (int i = 0; i < reps; ++i) rp = parallel();
  r.parallel_ms = (now_ms() - t1) / reps;
  r.identical = equal(rs, rp);
  std::printf("%-28s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx   %s\n", name.c_str(),
              r.serial_ms, r.parallel_ms, r.serial_ms / r.parallel_ms,
              r.identical ? "bit-identical" : "MISMATCH");
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  int scale = argc > 1 ? std::stoi(argv[1]) : 1;
  std::printf("threads available: %d\n\n", par::max_threads());
  bool all_ok = true;

  {
    // grid divergence reduction
    const size_t cells = static_cast<size_t>(1 << 21) * static_cast<size_t>(scale);
    std::vector<double> p(cells), q(cells);
    Rng rng(7);
    for (size_t i = 0; i < cells; ++i) {
      p[i] = 0.5 + rng.next_double();
      q[i] = 0.5 + rng.next_double();
    }
    auto kernel = [&](auto&& runner) {
      return runner(cells, [&](size_t lo, size_t hi) {
        double acc = 0.0;
        for (size_t i = lo; i < hi; ++i) {
          double m = 0.5 * (p[i] + q[i]);
          acc += 0.5 * p[i] * std::log(p[i] / m) + 0.5 * q[i] * std::log(q[i] / m);
        }
        return acc;
      });
    };
    auto r = bench(
        "jsd reduction (2M cells)",
        [&] { return kernel([](size_t n, auto f) { return par::block_sum_serial(n, f); }); },
        [&] { return kernel([](size_t n, auto f) { return par::block_sum(n, f); }); },
        [](double a, double b) { return a == b; }, 5);
    all_ok = all_ok && r.identical;
  }

  {
    // histogram accumulation
    const size_t n = static_cast<size_t>(8000000) * static_cast<size_t>(scale);
    std::vector<double> xs(n);
    Rng rng(9);
    for (auto& x : xs) x = rng.next_double();
    auto bin_of = [&](size_t i) { return static_cast<size_t>(xs[i] * 512); };
    auto r = bench(
        "histogram (8M samples)",
        [&] { return par::block_histogram_serial(n, 512, bin_of); },
        [&] { return par::block_histogram(n, 512, bin_of); },
        [](const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) { return a == b; },
        5);
    all_ok = all_ok && r.identical;
  }

  {
    // cat-map trajectory ensemble, per-replica seeds
    const size_t replicas = static_cast<size_t>(2000) * static_cast<size_t>(scale);
    const size_t steps = 2048;
    auto sys = TorusAutomorphism::cat_map();
    auto kernel = [&](bool parallel) {
      std::vector<double> out(replicas);
      auto body = [&](size_t r) {
        Point x = random_torus_point(2, child_seed(42, r));
        double s = 0.0;
        for (size_t i = 0; i < steps; ++i) {
          s += std::cos(2.0 * M_PI * x[0]) * std::cos(2.0 * M_PI * x[1]);
          x = sys.step(x);
        }
        out[r] = s / static_cast<double>(steps);
      };
      if (parallel)
        par::for_each(replicas, body);
      else
        par::for_each_serial(replicas, body);
      return out;
    };
    auto r = bench(
        "cat-map ensemble (2k x 2k)", [&] { return kernel(false); }, [&] { return kernel(true); },
        [](const std::vector<double>& a, const std::vector<double>& b) { return a == b; }, 3);
    all_ok = all_ok && r.identical;
  }

  {
    // density sampling (binary search + per-sample rng)
    GridDensity f = GridDensity::from_function(
        1, 512, [](const Point& p) { return 1.0 + 0.8 * std::sin(6.28318 * p[0]); });
    const size_t n = static_cast<size_t>(2000000) * static_cast<size_t>(scale);
    auto serial = [&] {
      const int save = par::max_threads();
      par::set_threads(1);
      std::vector<Point> out = sample_density(f, n, 11);
      par::set_threads(save);
      return out;
    };
    auto parallel = [&] { return sample_density(f, n, 11); };
    auto r = bench(
        "density sampling (2M)", serial, parallel,
        [](const std::vector<Point>& a, const std::vector<Point>& b) {
          if (a.size() != b.size()) return false;
          for (size_t i = 0; i < a.size(); ++i)
            if (!(a[i] == b[i])) return false;
          return true;
        },
        3);
    all_ok = all_ok && r.identical;
  }

  std::printf("\n%s\n", all_ok ? "all kernels bit-identical across serial/openmp"
                               : "kernel mismatch detected");
  return all_ok ? 0 : 1;
}
