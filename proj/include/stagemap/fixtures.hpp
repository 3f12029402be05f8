#ifndef STAGEMAP_FIXTURES_HPP
#define STAGEMAP_FIXTURES_HPP

#include <cstdint>
#include <filesystem>

namespace stagemap {

struct FixturePaths {
    std::filesystem::path network;
    std::filesystem::path platform;
    std::filesystem::path costs;
    std::filesystem::path profile;
    std::filesystem::path baseline_fast;   // full width on the fast unit
    std::filesystem::path baseline_frugal; // full width on a frugal unit
};

// Writes a self-consistent synthetic suite into `dir`: a 4-layer network with
// decaying channel importance, a platform with one fast-but-hungry unit and
// two slow-but-frugal ones, a cost table covering every (layer, unit, level,
// channel count) key, a fixed exit profile, and the two single-stage
// baseline configs. Deterministic for a fixed seed.
FixturePaths write_fixture_suite(const std::filesystem::path& dir, std::uint64_t seed);

} // namespace stagemap

#endif
