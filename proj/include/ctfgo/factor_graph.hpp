#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "ctfgo/gp_model.hpp"
#include "ctfgo/measurements.hpp"
#include "ctfgo/noise_model.hpp"

namespace ctfgo {

enum class FactorKind { gp_prior, pseudorange, odometry, prior };

/// Unary anchor on one knot with per-component standard deviations.
struct PriorPayload {
  StateKnot mean;
  Vec8 sigma = Vec8::Ones();
};

/// Linearization constants of a GP prior link, fixed once knot times are.
struct GpPriorPayload {
  double dt = 0.0;
  Mat8 phi = Mat8::Identity();
  Mat8 info_sqrt = Mat8::Identity();
};

struct Factor {
  FactorKind kind = FactorKind::pseudorange;
  double t_meas = 0.0;
  std::variant<std::monostate, SatObservation, OdometryMeasurement,
               PriorPayload, GpPriorPayload>
      payload;
  NoiseModel noise;

  static Factor Pseudorange(const SatObservation& obs, NoiseModel noise);
  static Factor Odometry(const OdometryMeasurement& odo);
  static Factor Prior(const PriorPayload& prior);
};

/// Factor plus its knot bindings. Interpolated pseudoranges bind the
/// bracketing pair through `interp`; odometry binds its two endpoint knots.
struct BoundFactor {
  Factor factor;
  std::vector<int> knots;
  std::optional<GpInterpolant> interp;
};

struct GraphConfig {
  GpHyperParams hp;
  PriorPayload prior;
  double alignment_tol = 1e-3;  // seconds; closer than this binds to the knot
};

struct FactorGraph {
  std::vector<double> knot_times;
  GpHyperParams hp;
  std::vector<BoundFactor> factors;

  int num_knots() const { return static_cast<int>(knot_times.size()); }
};

/// Deterministic time-centric construction: consecutive knots are linked by
/// GP prior factors, one anchor prior sits on the first knot, and every
/// measurement is bound to its exact knot or bracketing pair. Measurement
/// input order does not affect the result.
FactorGraph build_graph(const std::vector<double>& knot_times,
                        std::vector<Factor> measurements,
                        const GraphConfig& config);

}  // namespace ctfgo
