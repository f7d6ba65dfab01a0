#include "surropt/qmc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace surropt {

namespace detail {
extern const char* const kJoeKuoTable;
}

DirectionTable DirectionTable::parse(std::string_view text)
{
    DirectionTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::uint64_t d = 0, s = 0, a = 0;
        if (!(fields >> d)) continue; // header or blank line
        if (!(fields >> s >> a) || s == 0 || s > 31) {
            throw Error("direction table line " + std::to_string(line_no) + ": malformed");
        }
        if (d != table.entries_.size() + 2) {
            throw Error("direction table line " + std::to_string(line_no) + ": dimensions must be consecutive from 2");
        }
        DirectionEntry e;
        e.degree = static_cast<std::uint32_t>(s);
        e.coefficients = static_cast<std::uint32_t>(a);
        for (std::uint64_t k = 1; k <= s; ++k) {
            std::uint64_t m = 0;
            if (!(fields >> m)) {
                throw Error("direction table line " + std::to_string(line_no) + ": expected " + std::to_string(s) +
                            " direction numbers");
            }
            // m_k must be odd and below 2^k
            if (m % 2 == 0 || m >= (std::uint64_t{1} << k)) {
                throw Error("direction table line " + std::to_string(line_no) + ": invalid m_" + std::to_string(k));
            }
            e.initial.push_back(static_cast<std::uint32_t>(m));
        }
        table.entries_.push_back(std::move(e));
    }
    return table;
}

DirectionTable DirectionTable::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open direction table " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const DirectionEntry& DirectionTable::entry(std::size_t dimension) const
{
    if (dimension < 2 || dimension > max_dimension()) {
        throw Error("direction table has no entry for dimension " + std::to_string(dimension));
    }
    return entries_[dimension - 2];
}

const DirectionTable& default_directions()
{
    static const DirectionTable table = DirectionTable::parse(detail::kJoeKuoTable);
    return table;
}

SobolSequence::SobolSequence(std::size_t dimension, std::uint64_t offset, const DirectionTable& table)
    : dimension_(dimension), directions_(dimension), state_(dimension, 0)
{
    if (dimension == 0 || dimension > table.max_dimension()) {
        throw Error("sobol: dimension must be in [1, " + std::to_string(table.max_dimension()) + "]");
    }
    for (int k = 0; k < kBits; ++k) {
        directions_[0][k] = std::uint32_t{1} << (kBits - 1 - k);
    }
    for (std::size_t j = 1; j < dimension; ++j) {
        const auto& e = table.entry(j + 1);
        const int s = static_cast<int>(e.degree);
        auto& v = directions_[j];
        for (int k = 0; k < std::min(s, kBits); ++k) {
            v[k] = e.initial[k] << (kBits - 1 - k);
        }
        for (int k = s; k < kBits; ++k) {
            v[k] = v[k - s] ^ (v[k - s] >> s);
            for (int i = 1; i < s; ++i) {
                if ((e.coefficients >> (s - 1 - i)) & 1u) v[k] ^= v[k - i];
            }
        }
    }
    seek(1 + offset);
}

void SobolSequence::seek(std::uint64_t index)
{
    if (index == 0) throw Error("sobol: index 0 is never emitted");
    if (index >= kSobolMaxIndex) throw SequenceExhausted("sobol: index beyond 2^31 points");
    // Gray-code position of the previous point; next_point() applies one more step.
    const std::uint64_t prev = index - 1;
    const std::uint64_t gray = prev ^ (prev >> 1);
    for (std::size_t j = 0; j < dimension_; ++j) {
        std::uint32_t x = 0;
        for (int k = 0; k < kBits; ++k) {
            if ((gray >> k) & 1u) x ^= directions_[j][k];
        }
        state_[j] = x;
    }
    index_ = index;
}

Vector SobolSequence::next_point()
{
    if (index_ >= kSobolMaxIndex) throw SequenceExhausted("sobol: sequence exhausted after 2^31 points");
    // X_i = X_{i-1} ^ V_c with c the position of the lowest zero bit of i-1
    const int c = std::countr_one(index_ - 1);
    Vector point(static_cast<Eigen::Index>(dimension_));
    for (std::size_t j = 0; j < dimension_; ++j) {
        state_[j] ^= directions_[j][c];
        point[static_cast<Eigen::Index>(j)] = static_cast<double>(state_[j]) * 0x1.0p-32;
    }
    ++index_;
    return point;
}

std::vector<Vector> sample_batch(SobolSequence& seq, std::size_t count, const BoundsSpec& bounds)
{
    if (count == 0) throw Error("sample_batch: count must be positive");
    if (bounds.dim() != seq.dimension()) throw Error("sample_batch: bounds dimension does not match sequence");
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(bounds.from_unit(seq.next_point()));
    }
    return out;
}

double discrepancy_check(std::span<const Vector> points)
{
    if (points.size() < 2) throw Error("discrepancy_check: need at least two points");
    const auto d = points.front().size();
    for (const auto& p : points) {
        if (p.size() != d) throw Error("discrepancy_check: dimension mismatch");
    }
    constexpr int kCellBudgetBits = 12;
    const int max_level = std::max(1, kCellBudgetBits / static_cast<int>(d));
    const double n = static_cast<double>(points.size());

    double worst = 0.0;
    for (int level = 1; level <= max_level; ++level) {
        const std::uint64_t per_dim = std::uint64_t{1} << level;
        const double volume = std::pow(0.5, static_cast<double>(level) * static_cast<double>(d));
        std::unordered_map<std::uint64_t, std::size_t> counts;
        for (const auto& p : points) {
            // cell key: per-dimension cell indices packed base per_dim; d*level <= 64 by budget
            std::uint64_t key = 0;
            for (Eigen::Index j = 0; j < d; ++j) {
                auto cell = static_cast<std::uint64_t>(std::clamp(p[j], 0.0, std::nextafter(1.0, 0.0)) *
                                                       static_cast<double>(per_dim));
                key = key * per_dim + cell;
            }
            ++counts[key];
        }
        for (const auto& [key, c] : counts) {
            worst = std::max(worst, std::abs(static_cast<double>(c) / n - volume));
        }
        // empty cells deviate by exactly their volume
        const double total_cells = std::pow(static_cast<double>(per_dim), static_cast<double>(d));
        if (static_cast<double>(counts.size()) < total_cells) worst = std::max(worst, volume);
    }
    return worst;
}

} // namespace surropt
