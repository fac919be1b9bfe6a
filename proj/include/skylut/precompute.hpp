#pragma once

// Table construction, one scattering order at a time.
//
//   order 1   dS1 (Rayleigh and Mie, no phase), dE1 = direct sun on a
//             horizontal surface
//   order k   J_k  = sphere integral of phase * (dS_{k-1} + ground bounce
//                    of dE_{k-1})
//             dS_k = path integral of T * J_k
//             dE_k = hemisphere integral of dS_{k-1} * cos
//
// The stored inscatter grid is dS1_rayleigh + sum_k dS_k / P_R(nu); Mie
// single scattering is not stored and is re-integrated at lookup time.
// The stored irradiance is sum_{k>=2} dE_k.

#include <functional>
#include <string>
#include <vector>

#include "skylut/atmosphere.hpp"
#include "skylut/tables.hpp"

namespace skylut {

struct PrecomputeOptions {
  TableDims dims;
  int orders = 4;
  int transmittance_samples = 500;
  int path_samples = 50;
  int sphere_zenith = 16;
  int sphere_azimuth = 32;
  int threads = 0;
};

struct OrderStats {
  int order = 0;
  double delta_norm = 0.0;  // L-infinity norm of dS_k over texels and bands
  double seconds = 0.0;
};

class TableBuilder {
 public:
  TableBuilder(const AtmosphereModel& model, PrecomputeOptions options);

  void build_transmittance();
  void build_order1();
  // Computes order `order` (must be the next one) and accumulates it.
  // Throws DivergenceError if its norm exceeds the previous order's.
  void iterate_order(int order);

  int completed_orders() const { return completed_; }
  const std::vector<OrderStats>& stats() const { return stats_; }
  const ScatteringTables& tables() const { return tables_; }
  // dS of the last completed order (phase applied), per metre like
  // ScatteringTables::inscatter.
  const std::vector<float>& last_delta_inscatter() const { return delta_s_; }
  const std::vector<float>& last_delta_irradiance() const { return delta_e_; }
  // Order-1 Mie grid, per metre, while it is still alive (before order 2
  // finishes).
  const std::vector<float>& single_mie() const { return single_mie_; }

  ScatteringTables take();

 private:
  void compute_gathering(int order);
  void compute_delta_inscatter();
  void compute_delta_irradiance(int order);

  AtmosphereModel model_;
  PrecomputeOptions opt_;
  Medium medium_;
  ScatteringTables tables_;
  TableSampler sampler_;
  std::vector<float> single_rayleigh_;
  std::vector<float> single_mie_;
  std::vector<float> delta_s_;
  std::vector<float> delta_e_;
  std::vector<float> gather_;
  std::vector<OrderStats> stats_;
  int completed_ = 0;
  bool transmittance_done_ = false;
};

using ProgressFn = std::function<void(const OrderStats&)>;

ScatteringTables build_tables(const AtmosphereModel& model, const PrecomputeOptions& options,
                              std::vector<OrderStats>* stats = nullptr,
                              const ProgressFn& progress = {});

}  // namespace skylut
