#include "ctfgo/residual_window.hpp"

#include <cmath>

namespace ctfgo {

std::deque<ResidualSample>& ResidualWindow::buffer_for(int sat_id) {
  return buffers_[scope_ == WindowScope::pooled ? 0 : sat_id];
}

void ResidualWindow::push(const ResidualSample& sample) {
  if (!std::isfinite(sample.r)) {
    ++rejected_;
    return;
  }
  auto& buf = buffer_for(sample.sat_id);
  buf.push_back(sample);
  while (buf.size() > capacity_) buf.pop_front();
}

std::size_t ResidualWindow::size() const {
  std::size_t n = 0;
  for (const auto& [id, buf] : buffers_) n += buf.size();
  return n;
}

std::size_t ResidualWindow::size(int sat_id) const {
  const int key = scope_ == WindowScope::pooled ? 0 : sat_id;
  const auto it = buffers_.find(key);
  return it == buffers_.end() ? 0 : it->second.size();
}

std::vector<double> ResidualWindow::values() const {
  std::vector<double> out;
  out.reserve(size());
  for (const auto& [id, buf] : buffers_)
    for (const auto& s : buf) out.push_back(s.r);
  return out;
}

std::vector<double> ResidualWindow::values(int sat_id) const {
  const int key = scope_ == WindowScope::pooled ? 0 : sat_id;
  std::vector<double> out;
  const auto it = buffers_.find(key);
  if (it == buffers_.end()) return out;
  out.reserve(it->second.size());
  for (const auto& s : it->second) out.push_back(s.r);
  return out;
}

std::vector<int> ResidualWindow::satellite_ids() const {
  std::vector<int> out;
  for (const auto& [id, buf] : buffers_)
    if (!buf.empty()) out.push_back(id);
  return out;
}

}  // namespace ctfgo
