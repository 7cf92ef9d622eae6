// Command-line surface: ingestion, IsoFLOP fitting, scaling-law fitting,
// compute-optimal planning, recipes/FLOPs accounting, parity and synthetic
// grids. Exit codes: 0 success, 2 input/validation error, 3 numerical
// failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tokescale/errors.hpp"
#include "tokescale/isoflop.hpp"
#include "tokescale/json_io.hpp"
#include "tokescale/law1.hpp"
#include "tokescale/law2.hpp"
#include "tokescale/multilingual.hpp"
#include "tokescale/optimizer.hpp"
#include "tokescale/recipes.hpp"
#include "tokescale/records.hpp"
#include "tokescale/synth.hpp"

namespace ts = tokescale;
using ts::OrderedJson;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct CliError {
    int code;
    std::string message;
};

double parse_scalar(const std::string& text, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw CliError{kExitInput, std::string("cannot parse ") + what + " '" + text + "' as a number"};
    }
}

std::vector<double> parse_scalar_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_scalar(item, what));
    if (out.empty()) throw CliError{kExitInput, std::string("empty list for ") + what};
    return out;
}

ts::RecordFormat format_from_path(const std::string& path, const std::string& flag) {
    if (flag == "csv") return ts::RecordFormat::Csv;
    if (flag == "jsonl") return ts::RecordFormat::Jsonl;
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") return ts::RecordFormat::Jsonl;
    return ts::RecordFormat::Csv;
}

std::vector<ts::RunRecord> load_records(const std::string& path, const std::string& format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError{kExitInput, "cannot open records file '" + path + "'"};
    return ts::parse_runs(in, format_from_path(path, format));
}

std::size_t max_starts_from_env(std::size_t fallback) {
    const char* env = std::getenv("TOKESCALE_MAX_STARTS");
    if (!env || !*env) return fallback;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || v < 1) return fallback;
    return std::size_t(v);
}

void write_output(const std::optional<std::string>& path, const std::string& contents) {
    if (path) ts::write_file_atomic(*path, contents);
    else std::cout << contents;
}

std::vector<ts::RunRecord> filter_family(const std::vector<ts::RunRecord>& records,
                                         const std::string& family) {
    std::vector<ts::RunRecord> out;
    for (const auto& r : records) {
        bool is_latent = r.family != ts::Family::Subword;
        if ((family == "latent" && is_latent) || (family == "subword" && !is_latent))
            out.push_back(r);
    }
    if (out.empty()) throw CliError{kExitInput, "no records of family '" + family + "' in the input"};
    return out;
}

std::string list_budgets(const std::vector<ts::RunRecord>& records) {
    std::set<double> budgets;
    for (const auto& r : records) budgets.insert(r.budget_flops);
    std::ostringstream out;
    for (double b : budgets) out << (out.tellp() > 0 ? ", " : "") << b;
    return out.str();
}

OrderedJson plot_axes(const char* x_name, bool x_log, const char* y_name, bool y_log) {
    OrderedJson axes;
    axes["x"] = {{"name", x_name}, {"log", x_log}};
    axes["y"] = {{"name", y_name}, {"log", y_log}};
    return axes;
}

void write_plotspec(const std::string& base, const OrderedJson& spec) {
    ts::write_file_atomic(base + ".json", spec.dump(2) + "\n");
    // Flat CSV companion: one row per point, series label first.
    std::ostringstream csv;
    csv << "series,x,y\n";
    for (const auto& series : spec.at("series")) {
        if (!series.contains("y")) continue;  // heatmap grids stay JSON-only
        const auto& xs = series.at("x");
        const auto& ys = series.at("y");
        for (std::size_t i = 0; i < xs.size(); ++i)
            csv << series.at("label").get<std::string>() << ',' << xs.at(i).get<double>() << ','
                << ys.at(i).get<double>() << '\n';
    }
    ts::write_file_atomic(base + ".csv", csv.str());
}

// ---------------------------------------------------------------- fit-isoflop

int cmd_fit_isoflop(const std::string& records_path, const std::string& format,
                    std::optional<double> budget, std::optional<double> compression,
                    const std::string& mode, std::optional<std::string> out_path,
                    std::optional<std::string> plot_base) {
    auto records = load_records(records_path, format);
    if (records.empty()) throw CliError{kExitInput, "records file is empty"};

    std::vector<ts::RunRecord> selected;
    for (const auto& r : records) {
        if (budget && r.budget_flops != *budget) continue;
        if (compression && r.compression != *compression) continue;
        selected.push_back(r);
    }
    if (selected.empty()) {
        throw CliError{kExitInput, "no records match the requested cell; available budgets: " +
                                       list_budgets(records)};
    }

    OrderedJson out;
    if (mode == "2d") {
        auto fits = ts::fit_cells(selected);
        out["kind"] = "isoflop2d_set";
        out["fits"] = OrderedJson::array();
        for (const auto& f : fits) out["fits"].push_back(ts::to_json(f));
        if (plot_base) {
            OrderedJson spec;
            spec["kind"] = "plotspec";
            spec["plot_kind"] = "isoflop2d";
            spec["axes"] = plot_axes("bytes", true, "loss_bpb", false);
            spec["series"] = OrderedJson::array();
            for (const auto& f : fits) {
                std::vector<double> xs, ys, fx, fy;
                for (const auto& r : selected) {
                    if (r.budget_flops != f.budget || r.compression != f.compression) continue;
                    xs.push_back(r.bytes);
                    ys.push_back(r.loss_bpb);
                }
                for (int i = 0; i <= 40; ++i) {
                    double x = f.opt_log_bytes - 2.0 + i * 0.1;
                    fx.push_back(std::exp(x));
                    fy.push_back(f.a * x * x + f.b * x + f.c);
                }
                std::ostringstream label;
                label << "C=" << f.budget << " T=" << f.compression;
                spec["series"].push_back({{"label", label.str() + " points"}, {"x", xs}, {"y", ys}});
                spec["series"].push_back({{"label", label.str() + " fit"}, {"x", fx}, {"y", fy}});
            }
            write_plotspec(*plot_base, spec);
        }
    } else if (mode == "3d") {
        auto fits = ts::fit_surfaces(selected);
        out["kind"] = "isoflop3d_set";
        out["fits"] = OrderedJson::array();
        for (const auto& f : fits) out["fits"].push_back(ts::to_json(f));
        if (plot_base) {
            OrderedJson spec;
            spec["kind"] = "plotspec";
            spec["plot_kind"] = "isoflop3d-heatmap";
            spec["axes"] = plot_axes("compression", true, "bytes_per_param", true);
            spec["series"] = OrderedJson::array();
            for (const auto& f : fits) {
                std::vector<double> ts_axis, rho_axis;
                for (int i = 0; i <= 24; ++i)
                    ts_axis.push_back(f.opt_compression * std::exp(-1.5 + i * 0.125));
                for (int i = 0; i <= 24; ++i)
                    rho_axis.push_back(f.opt_bpp * std::exp(-1.5 + i * 0.125));
                std::vector<std::vector<double>> grid;
                for (double rho : rho_axis) {
                    std::vector<double> row;
                    for (double t : ts_axis) row.push_back(f.evaluate(t, rho));
                    grid.push_back(row);
                }
                std::ostringstream label;
                label << "C=" << f.budget;
                spec["series"].push_back(
                    {{"label", label.str()}, {"x", ts_axis}, {"rows", rho_axis}, {"grid", grid}});
            }
            write_plotspec(*plot_base, spec);
        }
    } else {
        throw CliError{kExitInput, "--mode must be 2d or 3d"};
    }
    write_output(out_path, out.dump(2) + "\n");
    return kExitOk;
}

// ------------------------------------------------------------------- fit-laws

std::vector<ts::Isoflop2D> cell_fits_for_family(const std::vector<ts::RunRecord>& records,
                                                bool use_total_params) {
    std::vector<ts::RunRecord> rows = records;
    if (use_total_params) {
        for (auto& r : rows) {
            if (!r.total_params)
                throw CliError{kExitInput,
                               "total_params missing on a record but --use-total-params was given"};
            r.latent_params = *r.total_params;
        }
    }
    return ts::fit_cells(rows);
}

int cmd_fit_laws(const std::string& records_path, const std::string& format, int stage,
                 const std::string& family, const std::string& residual,
                 std::optional<double> holdout, std::optional<std::string> out_path, bool joint,
                 bool use_total_params, std::size_t max_starts) {
    auto records = filter_family(load_records(records_path, format), family);
    ts::Family family_tag =
        family == "subword" ? ts::Family::Subword : records.front().family;

    auto cells = cell_fits_for_family(records, use_total_params);

    OrderedJson out;
    std::string summary;
    if (stage == 1) {
        std::vector<ts::OptimumPoint> optima;
        for (const auto& f : cells) optima.push_back({f.budget, f.compression, f.opt_bytes});
        ts::LawOneOptions options;
        options.family = family_tag;
        options.max_starts = max_starts;
        ts::LawOneParams params = ts::fit_law1(optima, options);
        out = ts::to_json(params);
        summary = ts::render_law_summary(&params, nullptr);
    } else if (stage == 2) {
        std::vector<ts::LossOptimum> optima;
        for (const auto& f : cells) optima.push_back({f.budget, f.compression, f.opt_loss});
        ts::LawTwoOptions options;
        options.family = family_tag;
        options.max_starts = max_starts;
        options.nested = !joint;

        ts::ResidualVariant variant = ts::ResidualVariant::ComputeT;
        if (residual == "auto") {
            if (!holdout)
                throw CliError{kExitInput, "--residual auto requires --holdout BUDGET"};
            ts::ResidualModelReport report = ts::select_residual_model(optima, *holdout, options);
            variant = report.selected;
            out["selection"] = ts::to_json(report);
            summary += ts::render_residual_table(report);
        } else {
            variant = ts::residual_variant_from_string(residual);
        }
        ts::LawTwoParams params = ts::fit_law2(optima, variant, options);
        OrderedJson law_json = ts::to_json(params);
        if (out.contains("selection")) law_json["selection"] = out["selection"];
        out = law_json;
        summary = ts::render_law_summary(nullptr, &params) + summary;
    } else {
        throw CliError{kExitInput, "--stage must be 1 or 2"};
    }
    std::cout << summary;
    write_output(out_path, out.dump(2) + "\n");
    return kExitOk;
}

// ----------------------------------------------------------------------- plan

int cmd_plan(const std::string& law1_path, const std::string& law2_path, double budget,
             const std::string& compression_flag, const std::string& family, long vocab,
             std::optional<std::string> out_path) {
    std::ifstream law1_in(law1_path);
    if (!law1_in) throw CliError{kExitInput, "cannot open law1 file '" + law1_path + "'"};
    std::ifstream law2_in(law2_path);
    if (!law2_in) throw CliError{kExitInput, "cannot open law2 file '" + law2_path + "'"};
    OrderedJson law1_doc, law2_doc;
    try {
        law1_in >> law1_doc;
        law2_in >> law2_doc;
    } catch (const std::exception& e) {
        throw CliError{kExitInput, std::string("cannot parse law JSON: ") + e.what()};
    }
    ts::LawOneParams law1 = ts::law1_from_json(law1_doc);
    ts::LawTwoParams law2 = ts::law2_from_json(law2_doc);

    double compression;
    std::string compression_source;
    if (compression_flag == "optimal") {
        compression = ts::optimal_compression(law2, budget);
        compression_source = "optimal";
    } else {
        compression = parse_scalar(compression_flag, "--compression");
        compression_source = "given";
    }

    double opt_bytes = ts::predict_data(law1, budget, compression);
    double opt_params = ts::predict_params(law1, budget, compression);
    double opt_bpp = ts::predict_bpp(law1, budget, compression);
    double predicted_loss = ts::predict_loss(law2, budget, compression);

    if (opt_params < ts::count_global_params(ts::kMinScale))
        throw CliError{kExitInput,
                       "budget " + std::to_string(budget) + " calls for " +
                           std::to_string(opt_params) +
                           " global parameters, below the smallest recipe scale (" +
                           std::to_string(long(ts::count_global_params(ts::kMinScale))) +
                           "); no supported configuration"};
    int scale = ts::kMinScale;
    while (scale <= ts::kMaxScale && ts::count_global_params(scale) < opt_params) ++scale;
    if (scale > ts::kMaxScale)
        throw CliError{kExitInput, "requested " + std::to_string(opt_params) +
                                       " global parameters exceeds the largest recipe scale (" +
                                       std::to_string(ts::kMaxScale) + ")"};

    ts::ArchRecipe recipe = family == "subword" ? ts::subword_recipe(scale, vocab)
                                                : ts::latent_recipe(scale);
    ts::BudgetAllocation exact = ts::bytes_for_budget(budget, recipe.params_global, compression);

    OrderedJson out;
    out["kind"] = "plan";
    out["budget"] = budget;
    out["compression"] = compression;
    out["compression_source"] = compression_source;
    out["opt_bytes"] = opt_bytes;
    out["opt_params"] = opt_params;
    out["opt_bpp"] = opt_bpp;
    out["predicted_loss"] = predicted_loss;
    out["scale"] = scale;
    out["recipe"] = ts::to_json(recipe);
    out["exact_bytes"] = exact.bytes;
    out["exact_bpp"] = exact.bytes_per_param;
    out["eq2_budget"] = ts::approx_compute(recipe.params_global, exact.bytes, compression);

    std::ostringstream table;
    table << "plan for C=" << budget << " T=" << compression << " (" << compression_source << ")\n"
          << "  optimal bytes       " << opt_bytes << "\n"
          << "  optimal params      " << opt_params << "\n"
          << "  bytes per param     " << opt_bpp << "\n"
          << "  predicted loss      " << predicted_loss << "\n"
          << "  recipe scale        " << scale << " (" << recipe.params_global
          << " global params)\n"
          << "  bytes at this scale " << exact.bytes << "\n";
    std::cout << table.str();
    write_output(out_path, out.dump(2) + "\n");
    return kExitOk;
}

// ------------------------------------------------------------ recipe / flops

int cmd_recipe(const std::string& family, int scale, long vocab,
               std::optional<std::string> out_path) {
    ts::ArchRecipe recipe =
        family == "subword" ? ts::subword_recipe(scale, vocab) : ts::latent_recipe(scale);
    write_output(out_path, ts::to_json(recipe).dump(2) + "\n");
    return kExitOk;
}

int cmd_flops(const std::string& family, int scale, long vocab, double compression, long context,
              bool no_attention, long window, std::optional<double> training_bytes,
              std::optional<std::string> out_path) {
    ts::ArchRecipe recipe =
        family == "subword" ? ts::subword_recipe(scale, vocab) : ts::latent_recipe(scale);
    ts::FlopsBreakdown b =
        ts::inference_flops_per_byte(recipe, compression, context, !no_attention, window);
    OrderedJson out = ts::to_json(b);
    if (training_bytes)
        out["training_flops"] =
            ts::training_flops(recipe, *training_bytes, compression, context, !no_attention, window);
    write_output(out_path, out.dump(2) + "\n");
    return kExitOk;
}

// --------------------------------------------------------------------- parity

int cmd_parity(const std::string& tsv_path, const std::string& base, bool with_x2,
               bool with_weights, const std::vector<std::string>& fit_paths,
               std::optional<std::string> out_path) {
    std::ifstream in(tsv_path, std::ios::binary);
    if (!in) throw CliError{kExitInput, "cannot open corpus '" + tsv_path + "'"};
    auto sentences = ts::parse_parallel_tsv(in);
    if (with_x2) {
        // Inflated copy of the base language rows.
        std::vector<ts::AlignedSentence> inflated;
        for (const auto& s : sentences) {
            if (s.language != base) continue;
            ts::AlignedSentence dup = s;
            dup.language = base + "_x2";
            dup.bytes = ts::inflate_bytes(std::vector<std::uint8_t>(s.bytes, 0x20)).size();
            inflated.push_back(dup);
        }
        sentences.insert(sentences.end(), inflated.begin(), inflated.end());
    }
    ts::ParityTable table = ts::estimate_parity(sentences, base);
    OrderedJson out = ts::to_json(table);
    if (with_weights) {
        OrderedJson w = OrderedJson::object();
        for (const auto& [lang, weight] : ts::mix_weights(table)) w[lang] = weight;
        out["mix_weights"] = w;
    }
    if (!fit_paths.empty()) {
        std::map<std::string, ts::Isoflop3D> fits;
        for (const auto& path : fit_paths) {
            std::ifstream fit_in(path);
            if (!fit_in) throw CliError{kExitInput, "cannot open fit file '" + path + "'"};
            OrderedJson doc;
            try {
                fit_in >> doc;
            } catch (const std::exception& e) {
                throw CliError{kExitInput, std::string("cannot parse fit JSON: ") + e.what()};
            }
            ts::Isoflop3D fit = ts::isoflop3d_from_json(doc);
            fits[fit.language] = fit;
        }
        ts::LanguageReport report = ts::language_report(fits, table);
        out["language_report"] = ts::to_json(report);
        std::cout << ts::render_language_report_csv(report);
    }
    write_output(out_path, out.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------- synth

int cmd_synth(const ts::TruthSpec& spec, const std::vector<double>& budgets,
              const std::vector<double>& compressions, std::size_t models_per_cell,
              std::optional<std::string> out_path) {
    auto records = ts::generate_grid(spec, budgets, compressions, models_per_cell);
    write_output(out_path, ts::serialize_runs(records, ts::RecordFormat::Csv));
    return kExitOk;
}

// ------------------------------------------------------------------- validate

int cmd_validate(std::optional<std::string> records_path, const std::string& format,
                 double tolerance, std::optional<std::string> json_path, const std::string& kind,
                 std::optional<std::string> out_path) {
    if (records_path) {
        auto records = load_records(*records_path, format);
        ts::GridReport report = ts::validate_grid(records, tolerance);
        write_output(out_path, ts::to_json(report).dump(2) + "\n");
        if (!report.offending_records.empty()) {
            std::cerr << report.offending_records.size()
                      << " record(s) deviate from the Eq.-2 budget beyond tolerance " << tolerance
                      << "\n";
            return kExitInput;
        }
        return kExitOk;
    }
    if (json_path) {
        if (kind.empty()) throw CliError{kExitInput, "--kind is required with --json"};
        std::ifstream in(*json_path);
        if (!in) throw CliError{kExitInput, "cannot open '" + *json_path + "'"};
        OrderedJson doc;
        try {
            in >> doc;
        } catch (const std::exception& e) {
            throw CliError{kExitInput, std::string("invalid JSON: ") + e.what()};
        }
        std::string err = ts::schema_check(doc, kind);
        if (!err.empty()) throw CliError{kExitInput, "schema check failed: " + err};
        std::cout << "ok\n";
        return kExitOk;
    }
    throw CliError{kExitInput, "validate needs --records or --json"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tokescale: compression-aware scaling-law analysis toolkit"};
    app.require_subcommand(1);

    // fit-isoflop
    auto* iso = app.add_subcommand("fit-isoflop", "Fit 2D/3D IsoFLOP curves from run records");
    std::string iso_records, iso_format = "auto", iso_mode = "2d";
    std::string iso_budget, iso_compression;
    std::string iso_out, iso_plot;
    iso->add_option("--records", iso_records, "Records file (CSV or JSONL)")->required();
    iso->add_option("--format", iso_format, "csv|jsonl (default: by extension)");
    iso->add_option("--budget", iso_budget, "Budget C to fit (scientific notation ok)");
    iso->add_option("--compression", iso_compression, "Restrict to one compression T");
    iso->add_option("--mode", iso_mode, "2d|3d")->check(CLI::IsMember({"2d", "3d"}));
    iso->add_option("--out", iso_out, "Output JSON path (stdout when omitted)");
    iso->add_option("--plot", iso_plot, "PlotSpec base path (writes BASE.json and BASE.csv)");

    // fit-laws
    auto* laws = app.add_subcommand("fit-laws", "Fit Scaling Law I / II from run records");
    std::string laws_records, laws_format = "auto", laws_family = "latent",
                laws_residual = "compute-t";
    int laws_stage = 1;
    std::string laws_holdout;
    std::string laws_out;
    bool laws_joint = false, laws_total = false;
    std::size_t laws_max_starts = ts::kDefaultMaxStarts;
    laws->add_option("--records", laws_records, "Records file")->required();
    laws->add_option("--format", laws_format, "csv|jsonl");
    laws->add_option("--stage", laws_stage, "1 (optimal data) or 2 (optimal loss)")->required();
    laws->add_option("--family", laws_family, "latent|subword")
        ->check(CLI::IsMember({"latent", "subword"}));
    laws->add_option("--residual", laws_residual, "mean|const-t|compute-t|auto");
    laws->add_option("--holdout", laws_holdout, "Holdout budget for --residual auto");
    laws->add_option("--out", laws_out, "Output JSON path");
    laws->add_flag("--joint", laws_joint, "Joint residual fit instead of nested stages");
    laws->add_flag("--use-total-params", laws_total, "Fit on total_params instead of latent_params");
    laws->add_option("--max-starts", laws_max_starts, "Multi-start cap (default 2000)");

    // plan
    auto* plan = app.add_subcommand("plan", "Plan a compute-optimal configuration from fitted laws");
    std::string plan_law1, plan_law2, plan_budget, plan_compression = "optimal",
                plan_family = "latent";
    long plan_vocab = 128000;
    std::string plan_out;
    plan->add_option("--law1", plan_law1, "LawOneParams JSON")->required();
    plan->add_option("--law2", plan_law2, "LawTwoParams JSON")->required();
    plan->add_option("--budget", plan_budget, "Training budget C")->required();
    plan->add_option("--compression", plan_compression, "Compression T or 'optimal'");
    plan->add_option("--family", plan_family, "latent|subword")
        ->check(CLI::IsMember({"latent", "subword"}));
    plan->add_option("--vocab", plan_vocab, "Vocabulary size for subword recipes");
    plan->add_option("--out", plan_out, "Output JSON path");

    // recipe
    auto* recipe = app.add_subcommand("recipe", "Emit an architecture recipe for a scale index");
    std::string recipe_family = "latent";
    int recipe_scale = 0;
    long recipe_vocab = 128000;
    std::string recipe_out;
    recipe->add_option("--family", recipe_family, "latent|subword")
        ->check(CLI::IsMember({"latent", "subword"}));
    recipe->add_option("--scale", recipe_scale, "Scale index s")->required();
    recipe->add_option("--vocab", recipe_vocab, "Vocabulary size (subword)");
    recipe->add_option("--out", recipe_out, "Output JSON path");

    // flops
    auto* flops = app.add_subcommand("flops", "Per-byte inference FLOPs breakdown");
    std::string flops_family = "latent";
    int flops_scale = 0;
    long flops_vocab = 128000, flops_context = ts::kDefaultContextBytes,
         flops_window = ts::kDefaultLocalWindowBytes;
    std::string flops_compression = "4";
    bool flops_no_attention = false;
    std::string flops_training_bytes;
    std::string flops_out;
    flops->add_option("--family", flops_family, "latent|subword")
        ->check(CLI::IsMember({"latent", "subword"}));
    flops->add_option("--scale", flops_scale, "Scale index s")->required();
    flops->add_option("--vocab", flops_vocab, "Vocabulary size (subword)");
    flops->add_option("--compression", flops_compression, "Compression T");
    flops->add_option("--context", flops_context, "Context length in bytes");
    flops->add_flag("--no-attention", flops_no_attention, "Exclude attention terms");
    flops->add_option("--window", flops_window, "Local attention window in bytes");
    flops->add_option("--training-bytes", flops_training_bytes,
                      "Also report training FLOPs over this many bytes");
    flops->add_option("--out", flops_out, "Output JSON path");

    // parity
    auto* parity = app.add_subcommand("parity", "Cross-lingual parity from a parallel corpus");
    std::string parity_tsv, parity_base = "eng";
    bool parity_x2 = false, parity_weights = false;
    std::vector<std::string> parity_fits;
    std::string parity_out;
    parity->add_option("--tsv", parity_tsv, "TSV corpus: sentence_id<TAB>language<TAB>text")
        ->required();
    parity->add_option("--base", parity_base, "Base language code");
    parity->add_flag("--with-x2", parity_x2, "Add an inflated x2 variant of the base language");
    parity->add_flag("--weights", parity_weights, "Also emit parity-proportional mix weights");
    parity->add_option("--fit", parity_fits, "Isoflop3D JSON per language (repeatable)");
    parity->add_option("--out", parity_out, "Output JSON path");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic experiment grid");
    ts::TruthSpec spec;
    std::string synth_budgets = "5e18,1e19,5e19,1e20,1e21,2e21";
    std::string synth_compressions = "1,2,4,6,8,12";
    std::size_t synth_models = 7;
    std::string synth_out;
    synth->add_option("--seed", spec.seed, "RNG seed");
    synth->add_option("--noise", spec.noise_sigma, "Multiplicative log-normal loss noise sigma");
    synth->add_option("--curvature", spec.curvature, "IsoFLOP curvature in ln B");
    synth->add_option("--b0", spec.b0, "Truth B0");
    synth->add_option("--alpha", spec.alpha, "Truth alpha");
    synth->add_option("--beta", spec.beta, "Truth beta");
    synth->add_option("--l0", spec.l0, "Truth L0");
    synth->add_option("--gamma", spec.gamma, "Truth gamma");
    synth->add_option("--e", spec.e, "Truth irreducible loss E");
    synth->add_option("--f", spec.f, "Truth residual curvature F");
    synth->add_option("--t0", spec.t0, "Truth T0");
    synth->add_option("--delta", spec.delta, "Truth delta");
    synth->add_option("--budgets", synth_budgets, "Comma-separated budgets");
    synth->add_option("--compressions", synth_compressions, "Comma-separated compressions");
    synth->add_option("--models-per-cell", synth_models, "Points per (C, T) cell");
    synth->add_option("--out", synth_out, "Output CSV path");

    // validate
    auto* validate = app.add_subcommand("validate", "Validate records or check output schemas");
    std::string val_records, val_format = "auto", val_json, val_kind;
    double val_tolerance = 0.05;
    std::string val_out;
    validate->add_option("--records", val_records, "Records file to grid-check");
    validate->add_option("--format", val_format, "csv|jsonl");
    validate->add_option("--tolerance", val_tolerance, "Relative Eq.-2 tolerance");
    validate->add_option("--json", val_json, "Machine output to schema-check");
    validate->add_option("--kind", val_kind,
                         "isoflop2d|isoflop3d|law1|law2|plan|plotspec|parity|grid_report|"
                         "residual_model_report");
    validate->add_option("--out", val_out, "Output JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
            return app.exit(e);
        std::cerr << e.what() << "\n";
        return kExitInput;
    }

    auto opt = [](const std::string& s) {
        return s.empty() ? std::optional<std::string>{} : std::optional<std::string>{s};
    };

    try {
        if (iso->parsed()) {
            std::optional<double> budget, compression;
            if (!iso_budget.empty()) budget = parse_scalar(iso_budget, "--budget");
            if (!iso_compression.empty()) compression = parse_scalar(iso_compression, "--compression");
            return cmd_fit_isoflop(iso_records, iso_format, budget, compression, iso_mode,
                                   opt(iso_out), opt(iso_plot));
        }
        if (laws->parsed()) {
            std::optional<double> holdout;
            if (!laws_holdout.empty()) holdout = parse_scalar(laws_holdout, "--holdout");
            return cmd_fit_laws(laws_records, laws_format, laws_stage, laws_family, laws_residual,
                                holdout, opt(laws_out), laws_joint, laws_total,
                                max_starts_from_env(laws_max_starts));
        }
        if (plan->parsed())
            return cmd_plan(plan_law1, plan_law2, parse_scalar(plan_budget, "--budget"),
                            plan_compression, plan_family, plan_vocab, opt(plan_out));
        if (recipe->parsed())
            return cmd_recipe(recipe_family, recipe_scale, recipe_vocab, opt(recipe_out));
        if (flops->parsed()) {
            std::optional<double> training_bytes;
            if (!flops_training_bytes.empty())
                training_bytes = parse_scalar(flops_training_bytes, "--training-bytes");
            return cmd_flops(flops_family, flops_scale, flops_vocab,
                             parse_scalar(flops_compression, "--compression"), flops_context,
                             flops_no_attention, flops_window, training_bytes, opt(flops_out));
        }
        if (parity->parsed())
            return cmd_parity(parity_tsv, parity_base, parity_x2, parity_weights, parity_fits,
                              opt(parity_out));
        if (synth->parsed())
            return cmd_synth(spec, parse_scalar_list(synth_budgets, "--budgets"),
                             parse_scalar_list(synth_compressions, "--compressions"), synth_models,
                             opt(synth_out));
        if (validate->parsed())
            return cmd_validate(opt(val_records), val_format, val_tolerance, opt(val_json),
                                val_kind, opt(val_out));
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const ts::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ts::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return kExitInput;
}
