#pragma once

#include <cstdint>
#include <vector>

#include "mmoc/hierarchy.hpp"

namespace mmoc::partition {

/// Shared-nothing decomposition of macro-primitives over in-process ranks.
/// Volume primitives are assigned in contiguous id blocks (balanced within
/// one); interface primitives go to the lowest-rank adjacent volume owner.
struct PartitionLayout {
  int rank_count = 1;
  std::vector<std::int32_t> primitive_rank;  // indexed by primitive id

  std::int32_t rank_of(std::int64_t primitive) const {
    return primitive_rank[static_cast<std::size_t>(primitive)];
  }
};

PartitionLayout partition_mesh(const mesh::MeshHierarchy& h, int ranks);

/// Exchange statistics of one synchronization step.
struct ExchangeStats {
  std::uint64_t migrated = 0;
  std::uint64_t payload_bytes = 0;

  ExchangeStats& operator+=(const ExchangeStats& o) {
    migrated += o.migrated;
    payload_bytes += o.payload_bytes;
    return *this;
  }
};

}  // namespace mmoc::partition
