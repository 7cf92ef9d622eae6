#include "tokescale/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "tokescale/errors.hpp"

namespace tokescale {

namespace {

OrderedJson interval_json(const ConfidenceInterval& ci, bool exponentiate) {
    OrderedJson j;
    j["estimate"] = exponentiate ? std::exp(ci.estimate) : ci.estimate;
    j["low"] = exponentiate ? std::exp(ci.low) : ci.low;
    j["high"] = exponentiate ? std::exp(ci.high) : ci.high;
    j["level"] = ci.level;
    j["std_error"] = ci.std_error;
    if (exponentiate) j["log_space"] = true;
    return j;
}

OrderedJson diagnostics_json(const FitDiagnostics& d) {
    OrderedJson j;
    j["rmse"] = d.rmse;
    j["r2"] = d.r2;
    j["adj_r2"] = d.adj_r2;
    j["n"] = d.n;
    j["p"] = d.p;
    return j;
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

OrderedJson to_json(const ArchRecipe& r) {
    OrderedJson j;
    j["kind"] = "recipe";
    j["family"] = to_string(r.family);
    j["scale"] = r.scale;
    j["global_layers"] = r.global_layers;
    j["global_heads"] = r.global_heads;
    j["global_dim"] = r.global_dim;
    if (r.family != Family::Subword) {
        j["local_layers"] = r.local_layers;
        j["local_heads"] = r.local_heads;
        j["local_dim"] = r.local_dim;
        j["crossattn_k"] = r.crossattn_k;
    } else {
        j["vocab_size"] = r.vocab_size;
    }
    j["params_global"] = r.params_global;
    j["params_local"] = r.params_local;
    j["params_cross"] = r.params_cross;
    j["params_total"] = r.params_total;
    return j;
}

OrderedJson to_json(const FlopsBreakdown& b) {
    OrderedJson j;
    j["kind"] = "flops_breakdown";
    j["global_per_byte"] = b.global_per_byte;
    j["local_per_byte"] = b.local_per_byte;
    j["cross_per_byte"] = b.cross_per_byte;
    j["total_per_byte"] = b.total_per_byte;
    j["global_share"] = b.global_share;
    j["context_bytes"] = b.context_bytes;
    j["attention_included"] = b.attention_included;
    return j;
}

OrderedJson to_json(const Isoflop2D& f) {
    OrderedJson j;
    j["kind"] = "isoflop2d";
    j["budget"] = f.budget;
    j["compression"] = f.compression;
    j["coeffs"] = {{"a", f.a}, {"b", f.b}, {"c", f.c}};
    j["opt_log_bytes"] = f.opt_log_bytes;
    j["opt_bytes"] = f.opt_bytes;
    j["opt_loss"] = f.opt_loss;
    j["opt_params"] = f.opt_params;
    j["opt_bpp"] = f.opt_bpp;
    j["n_points"] = f.n_points;
    j["rmse"] = f.rmse;
    j["vertex_outside_span"] = f.vertex_outside_span;
    j["language"] = f.language;
    return j;
}

OrderedJson to_json(const Isoflop3D& f) {
    OrderedJson j;
    j["kind"] = "isoflop3d";
    j["budget"] = f.budget;
    j["coeffs"] = f.coeffs;
    j["opt_compression"] = f.opt_compression;
    j["opt_bpp"] = f.opt_bpp;
    j["opt_loss"] = f.opt_loss;
    j["hessian_pd"] = f.hessian_pd;
    j["n_points"] = f.n_points;
    j["rmse"] = f.rmse;
    j["language"] = f.language;
    return j;
}

OrderedJson to_json(const GridReport& r) {
    OrderedJson j;
    j["kind"] = "grid_report";
    j["n_records"] = r.n_records;
    j["budgets"] = r.budgets;
    j["compressions"] = r.compressions;
    j["max_flops_discrepancy"] = r.max_flops_discrepancy;
    j["offending_records"] = r.offending_records;
    return j;
}

OrderedJson to_json(const LawOneParams& p) {
    OrderedJson j;
    j["kind"] = "law1";
    j["family"] = to_string(p.family);
    j["B0"] = p.b0;
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    j["N0"] = p.n0;
    if (!p.intervals.empty()) {
        // Internal parameterization is (ln B0, alpha, beta); B0's interval is
        // exponentiated for display.
        j["intervals"]["B0"] = interval_json(p.intervals[0], true);
        j["intervals"]["alpha"] = interval_json(p.intervals[1], false);
        j["intervals"]["beta"] = interval_json(p.intervals[2], false);
    }
    j["diagnostics"] = diagnostics_json(p.diagnostics);
    j["n_starts_tried"] = p.n_starts_tried;
    return j;
}

OrderedJson to_json(const LawTwoParams& p) {
    OrderedJson j;
    j["kind"] = "law2";
    j["family"] = to_string(p.family);
    j["L0"] = p.l0;
    j["gamma"] = p.gamma;
    j["residual_variant"] = to_string(p.residual_variant);
    j["E"] = p.e;
    if (p.residual_variant != ResidualVariant::Mean) {
        j["F"] = p.f;
        j["T0"] = p.t0;
    }
    if (p.residual_variant == ResidualVariant::ComputeT) j["delta"] = p.delta;
    OrderedJson offsets = OrderedJson::object();
    for (const auto& [t, f] : p.offsets) offsets[fmt(t, "%.17g")] = f;
    j["offsets"] = offsets;
    j["diagnostics"] = diagnostics_json(p.diagnostics);
    return j;
}

OrderedJson to_json(const ResidualModelReport& r) {
    OrderedJson j;
    j["kind"] = "residual_model_report";
    j["holdout_budget"] = r.holdout_budget;
    j["n_train"] = r.n_train;
    j["n_holdout"] = r.n_holdout;
    j["selected"] = to_string(r.selected);
    j["rows"] = OrderedJson::array();
    for (const auto& row : r.rows) {
        OrderedJson rj;
        rj["variant"] = to_string(row.variant);
        rj["E"] = row.e;
        if (row.variant != ResidualVariant::Mean) {
            rj["F"] = row.f;
            rj["T0"] = row.t0;
        }
        if (row.variant == ResidualVariant::ComputeT) rj["delta"] = row.delta;
        rj["rmse_holdout"] = row.rmse_holdout;
        rj["r2"] = row.r2;
        rj["adj_r2"] = row.adj_r2;
        j["rows"].push_back(rj);
    }
    return j;
}

OrderedJson to_json(const ParityTable& t) {
    OrderedJson j;
    j["kind"] = "parity";
    j["base_language"] = t.base_language;
    OrderedJson entries = OrderedJson::object();
    for (const auto& [lang, p] : t.entries) entries[lang] = p;
    j["entries"] = entries;
    OrderedJson counts = OrderedJson::object();
    for (const auto& [lang, n] : t.n_sentences) counts[lang] = n;
    j["n_sentences"] = counts;
    return j;
}

OrderedJson to_json(const LanguageReport& r) {
    OrderedJson j;
    j["kind"] = "language_report";
    j["base_language"] = r.base_language;
    j["rows"] = OrderedJson::array();
    for (const auto& row : r.rows) {
        OrderedJson rj;
        rj["language"] = row.language;
        rj["parity"] = row.parity;
        rj["opt_bpp"] = row.opt_bpp;
        rj["bpp_ratio"] = row.bpp_ratio;
        rj["opt_compression"] = row.opt_compression;
        rj["compression_ratio"] = row.compression_ratio;
        rj["min_bpb"] = row.min_bpb;
        j["rows"].push_back(rj);
    }
    return j;
}

LawOneParams law1_from_json(const OrderedJson& j) {
    if (!j.contains("B0") || !j.contains("alpha") || !j.contains("beta"))
        throw DomainError("law1 JSON must contain B0, alpha and beta");
    LawOneParams p;
    p.b0 = j.at("B0").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.beta = j.at("beta").get<double>();
    p.n0 = 1.0 / (6.0 * p.b0);
    if (j.contains("family")) p.family = family_from_string(j.at("family").get<std::string>());
    return p;
}

LawTwoParams law2_from_json(const OrderedJson& j) {
    if (!j.contains("L0") || !j.contains("gamma") || !j.contains("E"))
        throw DomainError("law2 JSON must contain L0, gamma and E");
    LawTwoParams p;
    p.l0 = j.at("L0").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.e = j.at("E").get<double>();
    p.residual_variant = j.contains("residual_variant")
                             ? residual_variant_from_string(j.at("residual_variant").get<std::string>())
                             : ResidualVariant::Mean;
    if (p.residual_variant != ResidualVariant::Mean) {
        p.f = j.at("F").get<double>();
        p.t0 = j.at("T0").get<double>();
    }
    if (p.residual_variant == ResidualVariant::ComputeT) p.delta = j.at("delta").get<double>();
    if (j.contains("family")) p.family = family_from_string(j.at("family").get<std::string>());
    if (j.contains("offsets"))
        for (const auto& [key, value] : j.at("offsets").items())
            p.offsets[std::stod(key)] = value.get<double>();
    return p;
}

Isoflop3D isoflop3d_from_json(const OrderedJson& j) {
    Isoflop3D f;
    f.budget = j.at("budget").get<double>();
    auto coeffs = j.at("coeffs");
    for (std::size_t i = 0; i < 6; ++i) f.coeffs[i] = coeffs.at(i).get<double>();
    f.opt_compression = j.at("opt_compression").get<double>();
    f.opt_bpp = j.at("opt_bpp").get<double>();
    f.opt_loss = j.at("opt_loss").get<double>();
    f.hessian_pd = j.value("hessian_pd", true);
    f.n_points = j.value("n_points", std::size_t{0});
    f.rmse = j.value("rmse", 0.0);
    f.language = j.value("language", std::string("eng"));
    return f;
}

std::string render_residual_table(const ResidualModelReport& r) {
    std::ostringstream out;
    out << "residual model        E        F        T0      delta    RMSE      R2      adj R2\n";
    for (const auto& row : r.rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-20s  %-7.4f  %-7s  %-7s  %-7s  %-8.4f  %-6.3f  %-6.3f\n",
                      to_string(row.variant).c_str(), row.e,
                      row.variant == ResidualVariant::Mean ? "-" : fmt(row.f, "%.4f").c_str(),
                      row.variant == ResidualVariant::Mean ? "-" : fmt(row.t0, "%.3g").c_str(),
                      row.variant == ResidualVariant::ComputeT ? fmt(row.delta, "%.4f").c_str() : "-",
                      row.rmse_holdout, row.r2, row.adj_r2);
        out << line;
    }
    out << "selected: " << to_string(r.selected) << " (holdout budget " << fmt(r.holdout_budget)
        << ", " << r.n_train << " train / " << r.n_holdout << " holdout points)\n";
    return out.str();
}

std::string render_residual_table_csv(const ResidualModelReport& r) {
    std::ostringstream out;
    out << "variant,E,F,T0,delta,rmse_holdout,r2,adj_r2,selected\n";
    for (const auto& row : r.rows) {
        out << to_string(row.variant) << ',' << fmt(row.e, "%.17g") << ',';
        if (row.variant != ResidualVariant::Mean)
            out << fmt(row.f, "%.17g") << ',' << fmt(row.t0, "%.17g") << ',';
        else
            out << ",,";
        if (row.variant == ResidualVariant::ComputeT) out << fmt(row.delta, "%.17g");
        out << ',' << fmt(row.rmse_holdout, "%.17g") << ',' << fmt(row.r2, "%.17g") << ','
            << fmt(row.adj_r2, "%.17g") << ',' << (row.variant == r.selected ? "yes" : "no") << '\n';
    }
    return out.str();
}

std::string render_language_report_csv(const LanguageReport& r) {
    std::ostringstream out;
    out << "language,parity,opt_bpp,bpp_ratio,opt_compression,compression_ratio,min_bpb\n";
    for (const auto& row : r.rows)
        out << row.language << ',' << fmt(row.parity, "%.4g") << ',' << fmt(row.opt_bpp, "%.4g")
            << ',' << fmt(row.bpp_ratio, "%.3g") << ',' << fmt(row.opt_compression, "%.4g") << ','
            << fmt(row.compression_ratio, "%.3g") << ',' << fmt(row.min_bpb, "%.4g") << '\n';
    return out.str();
}

std::string render_law_summary(const LawOneParams* law1, const LawTwoParams* law2) {
    std::ostringstream out;
    out << "parameter   value\n";
    if (law1) {
        out << "alpha       " << fmt(law1->alpha, "%.3f") << '\n';
        out << "beta        " << fmt(law1->beta, "%.3f") << '\n';
        out << "B0          " << fmt(law1->b0, "%.3g") << '\n';
        out << "N0          " << fmt(law1->n0, "%.3g") << '\n';
    }
    if (law2) {
        out << "gamma       " << fmt(law2->gamma, "%.3f") << '\n';
        out << "L0          " << fmt(law2->l0, "%.4g") << '\n';
        out << "E           " << fmt(law2->e, "%.4f") << '\n';
        if (law2->residual_variant != ResidualVariant::Mean) {
            out << "F           " << fmt(law2->f, "%.4f") << '\n';
            out << "T0          " << fmt(law2->t0, "%.3f") << '\n';
        }
        if (law2->residual_variant == ResidualVariant::ComputeT)
            out << "delta       " << fmt(law2->delta, "%.4f") << '\n';
    }
    return out.str();
}

std::string schema_check(const OrderedJson& doc, const std::string& kind) {
    auto need = [&doc](std::initializer_list<const char*> keys) -> std::string {
        for (const char* k : keys)
            if (!doc.contains(k)) return std::string("missing key '") + k + "'";
        return "";
    };
    auto need_number = [&doc](std::initializer_list<const char*> keys) -> std::string {
        for (const char* k : keys)
            if (doc.contains(k) && !doc.at(k).is_number())
                return std::string("key '") + k + "' must be a number";
        return "";
    };
    if (!doc.is_object()) return "document is not a JSON object";
    if (doc.contains("kind") && doc.at("kind").get<std::string>() != kind &&
        !(kind == "isoflop" && (doc.at("kind") == "isoflop2d" || doc.at("kind") == "isoflop3d")))
        return "kind mismatch: document says '" + doc.at("kind").get<std::string>() + "'";

    std::string err;
    if (kind == "isoflop2d")
        err = need({"budget", "compression", "coeffs", "opt_bytes", "opt_loss", "n_points", "rmse"});
    else if (kind == "isoflop3d")
        err = need({"budget", "coeffs", "opt_compression", "opt_bpp", "opt_loss", "hessian_pd"});
    else if (kind == "law1") {
        err = need({"B0", "alpha", "beta", "N0"});
        if (err.empty()) err = need_number({"B0", "alpha", "beta", "N0"});
        if (err.empty()) {
            double b0 = doc.at("B0").get<double>(), n0 = doc.at("N0").get<double>();
            if (std::abs(n0 * 6.0 * b0 - 1.0) > 1e-9) return "N0 != 1/(6 B0)";
        }
    } else if (kind == "law2") {
        err = need({"L0", "gamma", "residual_variant", "E"});
        if (err.empty() && doc.at("residual_variant") != "mean") err = need({"F", "T0"});
        if (err.empty() && doc.at("residual_variant") == "compute_T") err = need({"delta"});
    } else if (kind == "plan")
        err = need({"budget", "compression", "opt_bytes", "opt_params", "scale", "recipe"});
    else if (kind == "plotspec")
        err = need({"plot_kind", "series", "axes"});
    else if (kind == "parity")
        err = need({"base_language", "entries"});
    else if (kind == "grid_report")
        err = need({"n_records", "budgets", "compressions", "max_flops_discrepancy"});
    else if (kind == "residual_model_report")
        err = need({"rows", "selected", "holdout_budget"});
    else
        return "unknown schema kind '" + kind + "'";
    return err;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    fs::path tmp = dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open '" + tmp.string() + "' for writing");
        out << contents;
        if (!out.flush()) throw InputError("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace tokescale
