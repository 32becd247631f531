#ifndef LOGNPCE_IO_HPP
#define LOGNPCE_IO_HPP

#include "lognpce/field.hpp"
#include "lognpce/multiindex.hpp"
#include "lognpce/pce.hpp"
#include "lognpce/pde.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace lognpce {

/// Fixed right-hand sides selectable from configuration files.
struct SourceTerm {
    enum class Kind { constant, sin_pi };
    Kind kind = Kind::constant;
    double value = 1.0; // constant case

    ScalarField make() const;

    friend bool operator==(const SourceTerm&, const SourceTerm&) = default;
};

nlohmann::json source_term_to_json(const SourceTerm& f);
SourceTerm source_term_from_json(const nlohmann::json& j);

/// {kind, parameters, J}; doubles survive the round trip bit-exactly.
nlohmann::json system_to_json(const FunctionSystem& system, std::size_t J);
std::pair<FunctionSystem, std::size_t> system_from_json(const nlohmann::json& j);

nlohmann::json weight_rule_to_json(const WeightRule& rule);
WeightRule weight_rule_from_json(const nlohmann::json& j);

nlohmann::json weight_sequence_to_json(const WeightSequence& w);
WeightSequence weight_sequence_from_json(const nlohmann::json& j);

/// Expansion export: {nu, norm_v} rows plus run metadata.
nlohmann::json expansion_to_json(const PceExpansion& expansion, const SourceTerm& f);

/// Nodal vectors as a flat little-endian float64 array: coefficients in the
/// JSON listing order, each contributing mesh.m values.
void write_expansion_binary(const PceExpansion& expansion, const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// CSV with a header row, '.' decimal separator and LF line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

} // namespace lognpce

#endif
