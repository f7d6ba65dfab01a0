#include "surropt/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace surropt {

std::string_view to_string(Provenance p)
{
    switch (p) {
    case Provenance::InitialSobol: return "initial-sobol";
    case Provenance::IntelligentQuery: return "intelligent-query";
    case Provenance::Baseline: return "baseline";
    }
    return "unknown";
}

Provenance provenance_from_string(std::string_view s)
{
    if (s == "initial-sobol") return Provenance::InitialSobol;
    if (s == "intelligent-query") return Provenance::IntelligentQuery;
    if (s == "baseline") return Provenance::Baseline;
    throw Error("unknown provenance tag '" + std::string(s) + "'");
}

void Dataset::add(Vector x, Vector y, Provenance p)
{
    if (!inputs.empty()) {
        require_dim(x, inputs.front().size(), "dataset input");
        require_dim(y, outputs.front().size(), "dataset output");
    }
    inputs.push_back(std::move(x));
    outputs.push_back(std::move(y));
    provenance.push_back(p);
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const
{
    Dataset out;
    for (auto r : rows) out.add(inputs.at(r), outputs.at(r), provenance.at(r));
    return out;
}

Dataset Dataset::prefix(std::size_t count) const
{
    if (count > size()) throw Error("dataset prefix longer than dataset");
    Dataset out;
    for (std::size_t r = 0; r < count; ++r) out.add(inputs[r], outputs[r], provenance[r]);
    return out;
}

Dataset Dataset::without_input(std::size_t column) const
{
    const auto m = static_cast<Eigen::Index>(input_dim());
    if (static_cast<Eigen::Index>(column) >= m || m < 2) throw Error("dataset: cannot drop input column");
    Dataset out;
    for (std::size_t r = 0; r < size(); ++r) {
        Vector x(m - 1);
        for (Eigen::Index i = 0, j = 0; i < m; ++i) {
            if (i != static_cast<Eigen::Index>(column)) x[j++] = inputs[r][i];
        }
        out.add(std::move(x), outputs[r], provenance[r]);
    }
    return out;
}

void Dataset::validate() const
{
    if (inputs.size() != outputs.size() || inputs.size() != provenance.size()) {
        throw Error("dataset: column lengths differ");
    }
    for (std::size_t r = 0; r < size(); ++r) {
        if (inputs[r].size() != inputs.front().size() || outputs[r].size() != outputs.front().size()) {
            throw Error("dataset: record " + std::to_string(r) + " has inconsistent dimensions");
        }
        if (!inputs[r].allFinite() || !outputs[r].allFinite()) {
            throw Error("dataset: record " + std::to_string(r) + " contains non-finite values");
        }
    }
}

std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_dataset_csv(const Dataset& data, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    const auto m = data.input_dim();
    const auto n = data.output_dim();
    for (std::size_t i = 0; i < m; ++i) out << "x_" << i + 1 << ',';
    for (std::size_t k = 0; k < n; ++k) out << "y_" << k + 1 << ',';
    out << "provenance\n";
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (Eigen::Index i = 0; i < data.inputs[r].size(); ++i) out << format_double(data.inputs[r][i]) << ',';
        for (Eigen::Index k = 0; k < data.outputs[r].size(); ++k) out << format_double(data.outputs[r][k]) << ',';
        out << to_string(data.provenance[r]) << '\n';
    }
}

namespace {

double parse_double(std::string_view s, std::size_t line)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error("dataset csv line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

} // namespace

Dataset read_dataset_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty file");
    const auto header = split_csv(line);
    std::size_t m = 0, n = 0;
    for (const auto& h : header) {
        if (h.rfind("x_", 0) == 0) ++m;
        else if (h.rfind("y_", 0) == 0) ++n;
    }
    if (m == 0 || n == 0 || header.size() != m + n + 1 || header.back() != "provenance") {
        throw Error(path + ": header must be x_1..x_m,y_1..y_n,provenance");
    }
    Dataset data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != m + n + 1) {
            throw Error(path + " line " + std::to_string(line_no) + ": expected " + std::to_string(m + n + 1) +
                        " fields");
        }
        Vector x(static_cast<Eigen::Index>(m)), y(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < m; ++i) x[static_cast<Eigen::Index>(i)] = parse_double(cells[i], line_no);
        for (std::size_t k = 0; k < n; ++k) y[static_cast<Eigen::Index>(k)] = parse_double(cells[m + k], line_no);
        data.add(std::move(x), std::move(y), provenance_from_string(cells.back()));
    }
    return data;
}

} // namespace surropt
