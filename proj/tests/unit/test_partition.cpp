#include <doctest.h>

#include <set>

#include "mmoc/error.hpp"
#include "mmoc/transport.hpp"

using namespace mmoc;

TEST_SUITE_BEGIN("partition");

TEST_CASE("volume blocks are contiguous and balanced within one") {
  SUBCASE("single rank owns everything") {
    const auto h = mesh::refine(mesh::make_unit_square(2, 2), 1);
    const auto layout = partition::partition_mesh(h, 1);
    for (const auto r : layout.primitive_rank) CHECK(r == 0);
  }

  SUBCASE("eight volumes over four ranks") {
    const auto h = mesh::refine(mesh::make_unit_square(2, 2), 1);
    const auto layout = partition::partition_mesh(h, 4);
    std::vector<int> counts(4, 0);
    for (std::int64_t v = 0; v < h.volume_count(); ++v)
      ++counts[static_cast<std::size_t>(layout.rank_of(v))];
    for (const auto c : counts) CHECK(c == 2);
  }

  SUBCASE("3072 volumes over 48 ranks give 64 each") {
    const auto h = mesh::refine(mesh::make_rectangle(1.5, 1.0, 48, 32), 0);
    REQUIRE(h.volume_count() == 3072);
    const auto layout = partition::partition_mesh(h, 48);
    std::vector<int> counts(48, 0);
    int prev = 0;
    for (std::int64_t v = 0; v < h.volume_count(); ++v) {
      const auto r = layout.rank_of(v);
      CHECK(r >= prev);  // contiguous blocks
      prev = r;
      ++counts[static_cast<std::size_t>(r)];
    }
    for (const auto c : counts) CHECK(c == 64);
  }

  SUBCASE("uneven division stays within one") {
    const auto h = mesh::refine(mesh::make_unit_square(5, 2), 0);  // 20 volumes
    const auto layout = partition::partition_mesh(h, 3);
    std::vector<int> counts(3, 0);
    for (std::int64_t v = 0; v < h.volume_count(); ++v)
      ++counts[static_cast<std::size_t>(layout.rank_of(v))];
    int lo = counts[0], hi = counts[0];
    for (const auto c : counts) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    CHECK(hi - lo <= 1);
  }

  SUBCASE("more ranks than volumes is rejected") {
    const auto h = mesh::refine(mesh::make_unit_square(), 2);  // 2 volumes
    CHECK_THROWS_AS(partition::partition_mesh(h, 3), ConfigError);
  }
}

TEST_CASE("interface primitives live on the lowest adjacent volume rank") {
  const auto h = mesh::refine(mesh::make_unit_square(2, 2), 1);
  const auto layout = partition::partition_mesh(h, 4);
  for (const auto& p : h.primitives()) {
    if (p.kind == mesh::PrimitiveKind::Volume) continue;
    std::int32_t lowest = 1 << 30;
    for (const auto v : p.neighbors) lowest = std::min(lowest, layout.rank_of(v));
    CHECK(layout.rank_of(p.id) == lowest);
  }
}

TEST_CASE("synchronization migrates exactly the crossing particles") {
  const auto h = mesh::refine(mesh::make_unit_square(2, 2), 2);
  const fem::FunctionSpace space(h, 1);
  const fem::FieldEvaluator eval(h);
  const auto layout = partition::partition_mesh(h, 4);
  transport::ParticleSwarm swarm(space, layout);
  const auto before = swarm.total();

  SUBCASE("stationary particles stay put") {
    const auto stats = swarm.synchronize();
    CHECK(stats.migrated == 0);
    CHECK(swarm.total() == before);
  }

  SUBCASE("a particle moved across a macro interface shows up exactly once") {
    // move one particle from the left half to the right half
    std::int64_t moved_dof = -1;
    for (int r = 0; r < swarm.rank_count() && moved_dof < 0; ++r)
      for (auto& p : swarm.rank_particles(r)) {
        if (p.position.x < 0.4 && p.position.x > 0.1 && p.position.y < 0.4 &&
            p.position.y > 0.1) {
          p.position.x += 0.5;
          fem::EvalStats es;
          p.location = eval.locate(p.position, p.current_volume, fem::OutsidePolicy::Clamp, &es);
          p.current_volume = p.location.macro;
          moved_dof = p.dof_index;
          break;
        }
      }
    REQUIRE(moved_dof >= 0);
    const auto stats = swarm.synchronize();
    CHECK(stats.migrated == 1);
    CHECK(swarm.total() == before);

    int found = 0;
    for (int r = 0; r < swarm.rank_count(); ++r)
      for (const auto& p : swarm.rank_particles(r))
        if (p.dof_index == moved_dof) {
          ++found;
          CHECK(layout.rank_of(p.current_volume) == r);
        }
    CHECK(found == 1);
  }
}

TEST_CASE("particle sets stay a disjoint cover through a transport step") {
  const auto h = mesh::refine(mesh::make_unit_square(2, 2), 3);
  const fem::FunctionSpace space(h, 1);
  const fem::FieldEvaluator eval(h);
  const auto layout = partition::partition_mesh(h, 4);
  const auto u = fem::interpolate(
      fem::VectorFunction([](const Vec3& x) { return Vec3{0.5 - x.y, x.x - 0.5, 0}; }), space);
  transport::ParticleSwarm swarm(space, layout);
  transport::TransportStats stats;
  for (int n = 0; n < 3; ++n) {
    transport::VelocityPair vp{&u, &u, 0.1 * n, 0.1 * (n + 1)};
    transport::backtrack(swarm, vp, transport::RKScheme::rk4(), eval, stats);
    CHECK(swarm.total() == space.dof_count());
    std::set<std::int64_t> seen;
    for (int r = 0; r < swarm.rank_count(); ++r)
      for (const auto& p : swarm.rank_particles(r)) CHECK(seen.insert(p.dof_index).second);
  }
  CHECK(stats.migrated > 0);
}

TEST_CASE("transported fields are independent of the partition layout") {
  const auto h = mesh::refine(mesh::make_unit_square(2, 2), 3);
  const fem::FunctionSpace space(h, 1);
  const fem::FieldEvaluator eval(h);
  const auto c0 = fem::interpolate(
      [](const Vec3& x) {
        return std::exp(-30 * ((x.x - 0.4) * (x.x - 0.4) + (x.y - 0.6) * (x.y - 0.6)));
      },
      space);
  const auto u = fem::interpolate(
      fem::VectorFunction([](const Vec3& x) { return Vec3{0.5 - x.y, x.x - 0.5, 0}; }), space);

  std::vector<fem::ScalarField> results;
  for (const int ranks : {1, 2, 4, 8}) {
    const auto layout = partition::partition_mesh(h, ranks);
    transport::LookBackBuffer buffer(space, layout, transport::LookBackBuffer::kInfinite, c0,
                                     true);
    transport::TransportStats stats;
    fem::ScalarField c = c0;
    for (int n = 0; n < 10; ++n) {
      transport::VelocityPair vp{&u, &u, 0.05 * n, 0.05 * (n + 1)};
      c = buffer.advance(vp, transport::RKScheme::rk4(), eval, stats);
    }
    results.push_back(c);
  }
  for (std::size_t k = 1; k < results.size(); ++k)
    for (std::int64_t i = 0; i < space.dof_count(); ++i)
      CHECK(results[k][i] == results[0][i]);  // bit-stable across layouts
}

TEST_SUITE_END();
