#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "tokescale/isoflop.hpp"
#include "tokescale/law1.hpp"
#include "tokescale/law2.hpp"
#include "tokescale/multilingual.hpp"
#include "tokescale/recipes.hpp"

namespace tokescale {

using OrderedJson = nlohmann::ordered_json;

OrderedJson to_json(const ArchRecipe& recipe);
OrderedJson to_json(const FlopsBreakdown& breakdown);
OrderedJson to_json(const Isoflop2D& fit);
OrderedJson to_json(const Isoflop3D& fit);
OrderedJson to_json(const GridReport& report);
OrderedJson to_json(const LawOneParams& params);
OrderedJson to_json(const LawTwoParams& params);
OrderedJson to_json(const ResidualModelReport& report);
OrderedJson to_json(const ParityTable& table);
OrderedJson to_json(const LanguageReport& report);

LawOneParams law1_from_json(const OrderedJson& j);
LawTwoParams law2_from_json(const OrderedJson& j);
Isoflop3D isoflop3d_from_json(const OrderedJson& j);

/// Table-8-shaped comparison of the three residual models.
std::string render_residual_table(const ResidualModelReport& report);
std::string render_residual_table_csv(const ResidualModelReport& report);

/// Table-2-shaped per-language optima.
std::string render_language_report_csv(const LanguageReport& report);

/// Table-1-shaped fitted-parameter summary.
std::string render_law_summary(const LawOneParams* law1, const LawTwoParams* law2);

/// Validates that `doc` has the required keys/types for `kind`; returns an
/// empty string when valid, otherwise the first problem found.
std::string schema_check(const OrderedJson& doc, const std::string& kind);

/// Writes text via a temp file + rename in the target directory.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace tokescale
