#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <vector>

namespace ctfgo {

enum class WindowScope { pooled, per_satellite };

struct ResidualSample {
  double t = 0.0;
  int sat_id = 0;
  double r = 0.0;  // meters
};

/// Sliding FIFO of past pseudorange residuals. Per-satellite scope keeps one
/// buffer of `capacity` per sat_id; non-finite pushes are rejected and counted.
class ResidualWindow {
 public:
  explicit ResidualWindow(std::size_t capacity = 1000,
                          WindowScope scope = WindowScope::pooled)
      : capacity_(capacity), scope_(scope) {}

  void push(const ResidualSample& sample);
  void push_epoch(const std::vector<ResidualSample>& samples) {
    for (const auto& s : samples) push(s);
  }

  WindowScope scope() const { return scope_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t rejected() const { return rejected_; }

  /// Pooled sample count, or the count for one satellite.
  std::size_t size() const;
  std::size_t size(int sat_id) const;

  /// Residual values in insertion order.
  std::vector<double> values() const;
  std::vector<double> values(int sat_id) const;

  std::vector<int> satellite_ids() const;

 private:
  std::deque<ResidualSample>& buffer_for(int sat_id);

  std::size_t capacity_;
  WindowScope scope_;
  std::map<int, std::deque<ResidualSample>> buffers_;  // pooled uses key 0
  std::size_t rejected_ = 0;
};

}  // namespace ctfgo
