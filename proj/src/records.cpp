#include "tokescale/records.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "tokescale/errors.hpp"
#include <nlohmann/json.hpp>

namespace tokescale {

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string> kColumns = {
    "family",       "budget_flops", "compression", "scale",    "latent_params",
    "total_params", "bytes",        "loss_bpb",    "language", "dataset"};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& text, std::size_t line, const std::string& field) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, field, "cannot parse '" + text + "' as a number");
    }
}

long parse_long(const std::string& text, std::size_t line, const std::string& field) {
    try {
        std::size_t pos = 0;
        long v = std::stol(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, field, "cannot parse '" + text + "' as an integer");
    }
}

// Minimal CSV field splitter with double-quote support.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void check_with_location(const RunRecord& r, std::size_t line) {
    try {
        check_record(r);
    } catch (const ValidationError& e) {
        throw ParseError(line, e.field(), e.what());
    }
}

RunRecord record_from_csv(const std::vector<std::string>& header,
                          const std::vector<std::string>& fields, std::size_t line) {
    if (fields.size() != header.size())
        throw ParseError(line, "(row)",
                         "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    RunRecord r;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& key = header[i];
        const std::string& val = fields[i];
        if (key == "family") {
            try {
                r.family = family_from_string(val);
            } catch (const std::exception& e) {
                throw ParseError(line, key, e.what());
            }
        } else if (key == "budget_flops") {
            r.budget_flops = parse_double(val, line, key);
        } else if (key == "compression") {
            r.compression = parse_double(val, line, key);
        } else if (key == "scale") {
            if (!val.empty()) r.scale = parse_long(val, line, key);
        } else if (key == "latent_params") {
            r.latent_params = parse_double(val, line, key);
        } else if (key == "total_params") {
            if (!val.empty()) r.total_params = parse_double(val, line, key);
        } else if (key == "bytes") {
            r.bytes = parse_double(val, line, key);
        } else if (key == "loss_bpb") {
            r.loss_bpb = parse_double(val, line, key);
        } else if (key == "language") {
            if (!val.empty()) r.language = val;
        } else if (key == "dataset") {
            if (!val.empty()) r.dataset = val;
        } else {
            r.extras.emplace_back(key, val);
        }
    }
    check_with_location(r, line);
    return r;
}

RunRecord record_from_json(const json& obj, std::size_t line) {
    if (!obj.is_object()) throw ParseError(line, "(row)", "expected a JSON object");
    RunRecord r;
    auto require_number = [&](const char* key) -> double {
        if (!obj.contains(key)) throw ParseError(line, key, "missing required field");
        const auto& v = obj.at(key);
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) return parse_double(v.get<std::string>(), line, key);
        throw ParseError(line, key, "expected a number");
    };
    if (!obj.contains("family")) throw ParseError(line, "family", "missing required field");
    try {
        r.family = family_from_string(obj.at("family").get<std::string>());
    } catch (const std::exception& e) {
        throw ParseError(line, "family", e.what());
    }
    r.budget_flops = require_number("budget_flops");
    r.compression = require_number("compression");
    r.latent_params = require_number("latent_params");
    r.bytes = require_number("bytes");
    r.loss_bpb = require_number("loss_bpb");
    if (obj.contains("scale") && !obj.at("scale").is_null())
        r.scale = obj.at("scale").get<long>();
    if (obj.contains("total_params") && !obj.at("total_params").is_null())
        r.total_params = obj.at("total_params").get<double>();
    if (obj.contains("language") && !obj.at("language").is_null())
        r.language = obj.at("language").get<std::string>();
    if (obj.contains("dataset") && !obj.at("dataset").is_null())
        r.dataset = obj.at("dataset").get<std::string>();
    for (const auto& [key, value] : obj.items()) {
        bool known = std::find(kColumns.begin(), kColumns.end(), key) != kColumns.end();
        if (!known) r.extras.emplace_back(key, value.is_string() ? value.get<std::string>() : value.dump());
    }
    check_with_location(r, line);
    return r;
}

}  // namespace

std::string to_string(Family family) {
    switch (family) {
        case Family::LatentEntropy: return "latent-entropy";
        case Family::LatentFixed: return "latent-fixed";
        case Family::Subword: return "subword";
    }
    return "latent-entropy";
}

Family family_from_string(const std::string& name) {
    if (name == "latent-entropy") return Family::LatentEntropy;
    if (name == "latent-fixed") return Family::LatentFixed;
    if (name == "subword") return Family::Subword;
    throw ValidationError("family", "unknown family '" + name +
                                        "' (expected latent-entropy, latent-fixed or subword)");
}

void check_record(const RunRecord& r) {
    auto positive = [](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ValidationError(field, "must be a positive finite number, got " + format_double(v));
    };
    positive(r.budget_flops, "budget_flops");
    positive(r.latent_params, "latent_params");
    positive(r.bytes, "bytes");
    positive(r.loss_bpb, "loss_bpb");
    if (!(r.compression >= 1.0) || !std::isfinite(r.compression))
        throw ValidationError("compression",
                              "must be >= 1 (bytes per token), got " + format_double(r.compression));
    if (r.scale && *r.scale <= 0) throw ValidationError("scale", "must be a positive integer");
    if (r.total_params && !(*r.total_params > 0.0))
        throw ValidationError("total_params", "must be positive when present");
}

std::vector<RunRecord> parse_runs(std::istream& source, RecordFormat format) {
    std::vector<RunRecord> records;
    std::string line;
    std::size_t line_no = 0;
    if (format == RecordFormat::Csv) {
        std::vector<std::string> header;
        while (std::getline(source, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (header.empty()) {
                header = split_csv_line(line);
                if (header.empty() || header[0] != "family")
                    throw ParseError(line_no, "family", "CSV header must start with 'family'");
                continue;
            }
            records.push_back(record_from_csv(header, split_csv_line(line), line_no));
        }
    } else {
        while (std::getline(source, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::parse_error& e) {
                throw ParseError(line_no, "(row)", e.what());
            }
            records.push_back(record_from_json(obj, line_no));
        }
    }
    return records;
}

std::vector<RunRecord> parse_runs(const std::string& text, RecordFormat format) {
    std::istringstream in(text);
    return parse_runs(in, format);
}

void serialize_runs(const std::vector<RunRecord>& records, std::ostream& out, RecordFormat format) {
    if (format == RecordFormat::Csv) {
        out << kRecordsCsvHeader;
        // Extra columns: union over records, in first-seen order.
        std::vector<std::string> extra_cols;
        for (const auto& r : records)
            for (const auto& [k, v] : r.extras)
                if (std::find(extra_cols.begin(), extra_cols.end(), k) == extra_cols.end())
                    extra_cols.push_back(k);
        for (const auto& k : extra_cols) out << ',' << csv_escape(k);
        out << '\n';
        for (const auto& r : records) {
            out << to_string(r.family) << ',' << format_double(r.budget_flops) << ','
                << format_double(r.compression) << ',';
            if (r.scale) out << *r.scale;
            out << ',' << format_double(r.latent_params) << ',';
            if (r.total_params) out << format_double(*r.total_params);
            out << ',' << format_double(r.bytes) << ',' << format_double(r.loss_bpb) << ','
                << csv_escape(r.language) << ',';
            if (r.dataset) out << csv_escape(*r.dataset);
            for (const auto& col : extra_cols) {
                out << ',';
                auto it = std::find_if(r.extras.begin(), r.extras.end(),
                                       [&](const auto& kv) { return kv.first == col; });
                if (it != r.extras.end()) out << csv_escape(it->second);
            }
            out << '\n';
        }
    } else {
        for (const auto& r : records) {
            json obj;
            obj["family"] = to_string(r.family);
            obj["budget_flops"] = r.budget_flops;
            obj["compression"] = r.compression;
            if (r.scale) obj["scale"] = *r.scale;
            obj["latent_params"] = r.latent_params;
            if (r.total_params) obj["total_params"] = *r.total_params;
            obj["bytes"] = r.bytes;
            obj["loss_bpb"] = r.loss_bpb;
            obj["language"] = r.language;
            if (r.dataset) obj["dataset"] = *r.dataset;
            for (const auto& [k, v] : r.extras) obj[k] = v;
            out << obj.dump() << '\n';
        }
    }
}

std::string serialize_runs(const std::vector<RunRecord>& records, RecordFormat format) {
    std::ostringstream out;
    serialize_runs(records, out, format);
    return out.str();
}

GridReport validate_grid(const std::vector<RunRecord>& records, double tolerance) {
    if (records.empty()) throw InsufficientDataError("validate_grid: no records");
    GridReport report;
    report.n_records = records.size();
    std::set<double> budgets, compressions;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        budgets.insert(r.budget_flops);
        compressions.insert(r.compression);
        double approx = 6.0 * r.latent_params * r.bytes / r.compression;
        double rel = std::abs(r.budget_flops - approx) / r.budget_flops;
        report.max_flops_discrepancy = std::max(report.max_flops_discrepancy, rel);
        if (rel > tolerance) report.offending_records.push_back(i);
    }
    report.budgets.assign(budgets.begin(), budgets.end());
    report.compressions.assign(compressions.begin(), compressions.end());
    return report;
}

double bpb_from_nats(double total_nll_nats, double n_bytes) {
    if (!(n_bytes > 0.0)) throw DomainError("bpb_from_nats: n_bytes must be positive");
    if (total_nll_nats < 0.0) throw DomainError("bpb_from_nats: negative log-likelihood expected");
    return total_nll_nats / (std::numbers::ln2_v<double> * n_bytes);
}

}  // namespace tokescale
