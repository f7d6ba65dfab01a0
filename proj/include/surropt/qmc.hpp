#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surropt/types.hpp"

namespace surropt {

/// Primitive polynomial and initial direction numbers for one Sobol dimension,
/// as listed in a Joe-Kuo direction-number file (`d s a m_1 ... m_s`).
struct DirectionEntry {
    std::uint32_t degree = 0;
    std::uint32_t coefficients = 0;
    std::vector<std::uint32_t> initial;
};

/// Direction numbers for dimensions 2..N+1; dimension 1 (van der Corput) is implicit.
class DirectionTable {
public:
    static DirectionTable parse(std::string_view text);
    static DirectionTable load(const std::string& path);

    std::size_t max_dimension() const { return entries_.size() + 1; }
    const DirectionEntry& entry(std::size_t dimension) const;

private:
    std::vector<DirectionEntry> entries_;
};

/// The table shipped in data/new-joe-kuo-6.64.txt, compiled into the library.
const DirectionTable& default_directions();

inline constexpr std::uint64_t kSobolMaxIndex = std::uint64_t{1} << 31;

/// Unscrambled Gray-code Sobol sequence. Emission starts at index 1 + offset;
/// the all-zeros point at index 0 is never emitted.
class SobolSequence {
public:
    explicit SobolSequence(std::size_t dimension, std::uint64_t offset = 0,
                           const DirectionTable& table = default_directions());

    std::size_t dimension() const { return dimension_; }
    std::uint64_t index() const { return index_; }

    /// Positions the sequence so the next emitted point is `index` (>= 1).
    void seek(std::uint64_t index);

    Vector next_point();

private:
    static constexpr int kBits = 32;

    std::size_t dimension_;
    std::uint64_t index_ = 1;
    std::vector<std::array<std::uint32_t, kBits>> directions_;
    std::vector<std::uint32_t> state_;
};

/// Draws `count` points and maps them affinely into `bounds`.
std::vector<Vector> sample_batch(SobolSequence& seq, std::size_t count, const BoundsSpec& bounds);

/// Uniformity statistic over equal-side dyadic cells at every level whose cell
/// count stays within a fixed budget: max |fraction of points in cell - cell volume|.
/// Lower is more uniform.
double discrepancy_check(std::span<const Vector> points);

} // namespace surropt
