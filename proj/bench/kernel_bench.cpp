#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>

#include "laserplan/execution.hpp"
#include "laserplan/kernels.hpp"
#include "laserplan/laser_model.hpp"
#include "laserplan/planner.hpp"
#include "laserplan/virtual_tissue.hpp"

using namespace laserplan;

namespace {

double seconds_per_call(const std::function<void()>& f, double budget_s) {
  using clock = std::chrono::steady_clock;
  f();
  int reps = 0;
  const auto start = clock::now();
  double elapsed = 0.0;
  do {
    f();
    ++reps;
    elapsed = std::chrono::duration<double>(clock::now() - start).count();
  } while (elapsed < budget_s);
  return elapsed / reps;
}

void row(const char* name, int n, double serial, double parallel) {
  std::printf("%-16s %6d %12.3f %12.3f %8.2fx\n", name, n, serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const double budget = argc > 1 ? std::atof(argv[1]) : 0.3;
  std::printf("threads: %d\n", max_threads());
  std::printf("%-16s %6s %12s %12s %9s\n", "kernel", "n", "serial ms", "omp ms", "speedup");
  for (int n : {200, 600, 1200}) {
    GridSpec g;
    g.origin = {-5.0, -5.0};
    g.spacing = {10.0 / (n - 1), 10.0 / (n - 1)};
    g.nx = g.ny = n;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(0.0, 0.1);
    HeightField surface(g, 0.0), target(g, -1.0);
    for (std::size_t k = 0; k < surface.size(); ++k) surface.at(k) = noise(rng);

    CutInput cut;
    cut.duty = 50.0;
    const double energy = energy_for_duty(EnergyTable{}, cut.duty);
    kernels::CraterStamp stamp = make_stamp(g, cut, LaserParams{}, energy, TiltModel::BeamAligned);
    // Whole-grid box so the comparison measures the loop, not the footprint.
    stamp.box = kernels::IndexBox::whole(g);
    HeightField a = surface, b = surface;
    row("stamp_crater", n, seconds_per_call([&] { kernels::serial::stamp_crater(a, stamp); }, budget),
        seconds_per_call([&] { kernels::omp::stamp_crater(b, stamp); }, budget));

    const auto box = kernels::IndexBox::whole(g);
    row("weighted_error", n,
        seconds_per_call([&] { kernels::serial::weighted_error(surface, target, {1.0, 2.0}, box); }, budget),
        seconds_per_call([&] { kernels::omp::weighted_error(surface, target, {1.0, 2.0}, box); }, budget));
    row("residual_sum", n, seconds_per_call([&] { kernels::serial::residual_sum(surface, target); }, budget),
        seconds_per_call([&] { kernels::omp::residual_sum(surface, target); }, budget));
    row("median3x3", n, seconds_per_call([&] { kernels::serial::median3x3(surface); }, budget),
        seconds_per_call([&] { kernels::omp::median3x3(surface); }, budget));
  }

  const Scenario well = make_square_well({6.0, 6.0}, 2.0);
  PlannerConfig cfg;
  const auto tree_time = [&](ExecutionPolicy policy) {
    cfg.policy = policy;
    return seconds_per_call(
        [&] { grow_tree(well.initial, well.target, well.constraint, LaserParams{}, EnergyTable{}, cfg); }, budget);
  };
  row("grow_tree", cfg.k_F, tree_time(ExecutionPolicy::Sequential), tree_time(ExecutionPolicy::Parallel));
  return 0;
}
