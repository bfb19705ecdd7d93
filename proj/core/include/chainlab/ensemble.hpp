#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "chainlab/dynamics.hpp"
#include "chainlab/observables.hpp"

namespace chainlab {

/// Runs work(m) for m = 0..replicas-1 on `parallelism` threads and hands each result
/// to merge(m, result) in increasing m, so the merged output does not depend on the
/// thread count. The first exception thrown by a worker stops the run and is rethrown.
template <class Work, class Merge>
void replicate(std::size_t replicas, std::size_t parallelism, Work work, Merge merge) {
  using Result = decltype(work(std::size_t{0}));
  parallelism = std::max<std::size_t>(1, parallelism);
  if (parallelism == 1) {
    for (std::size_t m = 0; m < replicas; ++m) merge(m, work(m));
    return;
  }
  const std::size_t batch = 4 * parallelism;
  for (std::size_t start = 0; start < replicas; start += batch) {
    const std::size_t count = std::min(batch, replicas - start);
    std::vector<Result> results(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::atomic<bool> failed{false};
    {
      std::vector<std::jthread> workers;
      for (std::size_t t = 0; t < std::min(parallelism, count); ++t) {
        workers.emplace_back([&] {
          for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= count || failed.load()) return;
            try {
              results[k] = work(start + k);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
              failed.store(true);
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t k = 0; k < count; ++k) merge(start + k, std::move(results[k]));
  }
}

/// Equilibrium ensemble on the ring: replica m starts from a Gibbs sample drawn with
/// stream (seed, m) and is advanced with the same stream.
struct EnsembleSpec {
  SimParams sim;
  std::size_t replicas = 2;
  double horizon_micro = 100.0;
  double snapshot_micro = 1.0;
  double max_lag_micro = 100.0;
  double mode_max_lag_micro = 0.0;  // 0: whole horizon
  std::size_t origin_stride = 1;    // in snapshots
  std::vector<int> modes;
  std::size_t bootstrap = 200;
  std::size_t parallelism = 1;
};

struct EnsembleResult {
  ThermoSummary thermo;
  CorrelationEstimate correlation;
  std::vector<ModeCorrelation> modes;
  std::size_t steps_per_snapshot = 0;
  std::size_t snapshots = 0;
};

/// Number of integrator steps in `interval`, which must be a whole multiple of dt.
std::size_t whole_steps(double interval, double dt, const char* what);

EnsembleResult run_equilibrium_ensemble(const EnsembleSpec& spec);

}  // namespace chainlab
