#include "sgbench/core/simulator.hpp"

namespace sgbench {

Field Simulator::advance(const Field& u, double dt) const {
  const Field states[1] = {u};
  const double dts[1] = {dt};
  return std::move(advance_batch(states, dts).front());
}

}  // namespace sgbench
