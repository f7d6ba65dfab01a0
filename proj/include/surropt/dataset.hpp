#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "surropt/types.hpp"

namespace surropt {

enum class Provenance { InitialSobol, IntelligentQuery, Baseline };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// Ordered simulator records (x, y, provenance).
struct Dataset {
    std::vector<Vector> inputs;
    std::vector<Vector> outputs;
    std::vector<Provenance> provenance;

    std::size_t size() const { return inputs.size(); }
    bool empty() const { return inputs.empty(); }
    std::size_t input_dim() const { return inputs.empty() ? 0 : static_cast<std::size_t>(inputs.front().size()); }
    std::size_t output_dim() const { return outputs.empty() ? 0 : static_cast<std::size_t>(outputs.front().size()); }

    void add(Vector x, Vector y, Provenance p);

    Dataset subset(const std::vector<std::size_t>& rows) const;
    Dataset prefix(std::size_t count) const;
    Dataset without_input(std::size_t column) const;

    /// Throws unless all records share dimensions and hold finite values.
    void validate() const;
};

void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

} // namespace surropt
