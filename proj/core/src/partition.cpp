#include "mmoc/partition.hpp"

#include "mmoc/error.hpp"

namespace mmoc::partition {

PartitionLayout partition_mesh(const mesh::MeshHierarchy& h, int ranks) {
  const auto nv = h.volume_count();
  if (ranks < 1) throw ConfigError("partition: rank count must be >= 1");
  if (ranks > nv)
    throw ConfigError("partition: more ranks than volume primitives (" + std::to_string(ranks) +
                      " > " + std::to_string(nv) + ")");
  PartitionLayout layout;
  layout.rank_count = ranks;
  layout.primitive_rank.resize(h.primitives().size());
  for (std::int64_t v = 0; v < nv; ++v)
    layout.primitive_rank[static_cast<std::size_t>(v)] =
        static_cast<std::int32_t>((v * ranks) / nv);
  for (const auto& p : h.primitives()) {
    if (p.kind == mesh::PrimitiveKind::Volume) continue;
    // neighbors of interface primitives are volumes sorted ascending, and
    // block assignment is monotone, so the first neighbor has the lowest rank
    layout.primitive_rank[static_cast<std::size_t>(p.id)] =
        layout.primitive_rank[static_cast<std::size_t>(p.neighbors.front())];
  }
  return layout;
}

}  // namespace mmoc::partition
