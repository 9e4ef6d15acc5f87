#pragma once

#include <span>

#include "bufsim/queue_sim.hpp"

namespace bufsim::detail {

/// Shared precondition checks for simulate and oracle_simulate.
void check_sim_inputs(std::span<const PacketRecord> records, const BufferPolicy& policy,
                      const LinkConfig& link);

}  // namespace bufsim::detail
