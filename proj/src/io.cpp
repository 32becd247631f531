#include "lognpce/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace lognpce {

using nlohmann::json;

ScalarField SourceTerm::make() const {
    switch (kind) {
    case Kind::constant: {
        const double v = value;
        return [v](double) { return v; };
    }
    case Kind::sin_pi:
        return [](double x) { return std::sin(std::numbers::pi * x); };
    }
    throw std::logic_error("unreachable");
}

json source_term_to_json(const SourceTerm& f) {
    switch (f.kind) {
    case SourceTerm::Kind::constant:
        return {{"kind", "constant"}, {"value", f.value}};
    case SourceTerm::Kind::sin_pi:
        return {{"kind", "sin_pi"}};
    }
    throw std::logic_error("unreachable");
}

SourceTerm source_term_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant")
        return {SourceTerm::Kind::constant, j.value("value", 1.0)};
    if (kind == "sin_pi")
        return {SourceTerm::Kind::sin_pi, 0.0};
    throw std::invalid_argument("unknown source term kind: " + kind);
}

json system_to_json(const FunctionSystem& system, std::size_t J) {
    const auto& p = system.params();
    json j;
    j["J"] = J;
    switch (p.kind) {
    case FunctionSystem::Kind::kl_brownian_bridge:
        j["kind"] = "kl_brownian_bridge";
        break;
    case FunctionSystem::Kind::schauder:
        j["kind"] = "schauder";
        break;
    case FunctionSystem::Kind::scaled_custom:
        j["kind"] = "scaled_custom";
        j["amplitude"] = p.amplitude_scale;
        j["alpha"] = p.alpha;
        break;
    case FunctionSystem::Kind::disjoint_indicator:
        j["kind"] = "disjoint_indicator";
        j["partition"] = p.partition == FunctionSystem::Partition::uniform ? "uniform"
                                                                           : "dyadic";
        if (p.power_amplitudes) {
            j["amplitude_scale"] = p.amplitude_scale;
            j["amplitude_decay"] = p.amplitude_decay;
        } else {
            j["amplitudes"] = p.amplitudes;
        }
        break;
    }
    return j;
}

std::pair<FunctionSystem, std::size_t> system_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const auto J = j.value("J", std::size_t{1});
    if (kind == "kl_brownian_bridge")
        return {FunctionSystem::kl_brownian_bridge(), J};
    if (kind == "schauder")
        return {FunctionSystem::schauder(), J};
    if (kind == "scaled_custom")
        return {FunctionSystem::scaled_custom(j.at("amplitude").get<double>(),
                                              j.at("alpha").get<double>()),
                J};
    if (kind == "disjoint_indicator") {
        if (j.contains("amplitudes")) {
            if (j.value("partition", "uniform") != std::string("uniform"))
                throw std::invalid_argument("explicit amplitudes need the uniform partition");
            return {FunctionSystem::disjoint_indicator(
                        j.at("amplitudes").get<std::vector<double>>()),
                    J};
        }
        return {FunctionSystem::disjoint_indicator_power(
                    j.at("amplitude_scale").get<double>(),
                    j.at("amplitude_decay").get<double>()),
                J};
    }
    throw std::invalid_argument("unknown function system kind: " + kind);
}

json weight_rule_to_json(const WeightRule& rule) {
    switch (rule.kind) {
    case WeightRule::Kind::power:
        return {{"kind", "power"}, {"scale", rule.scale}, {"exponent", rule.exponent}};
    case WeightRule::Kind::dyadic_level:
        return {{"kind", "dyadic_level"}, {"scale", rule.scale}, {"exponent", rule.exponent}};
    case WeightRule::Kind::sqrt_log:
        return {{"kind", "sqrt_log"}, {"scale", rule.scale}};
    case WeightRule::Kind::explicit_list:
        return {{"kind", "explicit"}, {"values", rule.values}, {"tail", rule.tail}};
    }
    throw std::logic_error("unreachable");
}

WeightRule weight_rule_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "power")
        return WeightRule::power(j.value("scale", 1.0), j.value("exponent", 0.0));
    if (kind == "dyadic_level")
        return WeightRule::dyadic_level(j.value("scale", 1.0), j.value("exponent", 0.0));
    if (kind == "sqrt_log")
        return WeightRule::sqrt_log(j.value("scale", 1.0));
    if (kind == "explicit")
        return WeightRule::explicit_list(j.at("values").get<std::vector<double>>(),
                                         j.value("tail", 1.0));
    throw std::invalid_argument("unknown weight rule kind: " + kind);
}

json weight_sequence_to_json(const WeightSequence& w) {
    return {{"rho", weight_rule_to_json(w.rho)}, {"r", w.r}};
}

WeightSequence weight_sequence_from_json(const json& j) {
    WeightSequence w{weight_rule_from_json(j.at("rho")), j.value("r", 1)};
    w.validate();
    return w;
}

json expansion_to_json(const PceExpansion& expansion, const SourceTerm& f) {
    json j;
    j["system"] = system_to_json(expansion.system, expansion.J);
    j["quad_order"] = expansion.quad_order;
    j["mesh_m"] = expansion.mesh.m;
    j["f"] = source_term_to_json(f);
    j["tensor_nodes"] = expansion.tensor_nodes;
    j["mean_square_norm"] = expansion.mean_square_norm;
    json rows = json::array();
    for (const auto& c : expansion.coefficients)
        rows.push_back({{"nu", c.nu.to_string()}, {"norm_v", c.norm_v}});
    j["coefficients"] = std::move(rows);
    return j;
}

void write_expansion_binary(const PceExpansion& expansion,
                            const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little,
                  "binary export assumes a little-endian host");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string());
    for (const auto& c : expansion.coefficients)
        out.write(reinterpret_cast<const char*>(c.u_nu.coeffs.data()),
                  static_cast<std::streamsize>(c.u_nu.coeffs.size() * sizeof(double)));
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

std::string format_double(double v) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
    if (ec != std::errc{})
        throw std::runtime_error("double formatting failed");
    return std::string(buffer, ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("CSV row width mismatch");
    rows_.push_back(std::move(cells));
}

std::string CsvWriter::str() const {
    std::string out;
    auto append_line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k > 0)
                out += ',';
            out += cells[k];
        }
        out += '\n';
    };
    append_line(header_);
    for (const auto& row : rows_)
        append_line(row);
    return out;
}

void CsvWriter::write(const std::filesystem::path& path) const {
    write_text(path, str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    json j;
    in >> j;
    return j;
}

} // namespace lognpce
