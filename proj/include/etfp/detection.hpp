#ifndef ETFP_DETECTION_HPP_
#define ETFP_DETECTION_HPP_

// Per-user correlation statistics T_m(z) = <z, gamma f_m> / gamma^2 and the
// focused detector that accuses user m when T_m >= tau.

#include <algorithm>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "etfp/channel.hpp"
#include "etfp/designs.hpp"

namespace etfp {

template <typename Scalar = double>
struct TestStatistics {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;  // one per user
  double gamma2 = 0;
};

struct DetectionOutcome {
  double tau = 0;
  std::vector<Index> accused;  // increasing, 0-based
};

struct TrialEvents {
  bool detected = false;     // some colluder accused
  bool false_alarm = false;  // some innocent accused
};

// With unit-norm f_m, <z, gamma f_m> / gamma^2 reduces to <z, f_m> / gamma.
template <typename Scalar, typename Derived>
TestStatistics<Scalar> test_statistics(const Eigen::MatrixBase<Derived> &z,
                                       const DesignMatrix<Scalar> &F, const EmbeddingParams &p) {
  if (z.size() != F.dim()) {
    throw DimensionError("test_statistics: residual has " + std::to_string(z.size()) +
                         " samples, design has N=" + std::to_string(F.dim()));
  }
  TestStatistics<Scalar> T;
  T.gamma2 = p.gamma2();
  T.values = (F.matrix().transpose() * z) / Scalar(p.gamma());
  return T;
}

// Ties accuse: T_m == tau decides H1.
template <typename Scalar>
DetectionOutcome focused_detect(const TestStatistics<Scalar> &T, double tau) {
  DetectionOutcome out;
  out.tau = tau;
  for (Index m = 0; m < T.values.size(); ++m) {
    if (double(T.values(m)) >= tau) out.accused.push_back(m);
  }
  return out;
}

// `truth` must be sorted (AttackSpec::coalition is).
inline TrialEvents trial_events(const DetectionOutcome &outcome, std::span<const Index> truth) {
  TrialEvents ev;
  for (Index m : outcome.accused) {
    const bool guilty = std::binary_search(truth.begin(), truth.end(), m);
    ev.detected = ev.detected || guilty;
    ev.false_alarm = ev.false_alarm || !guilty;
    if (ev.detected && ev.false_alarm) break;
  }
  return ev;
}

}  // namespace etfp

#endif  // ETFP_DETECTION_HPP_
