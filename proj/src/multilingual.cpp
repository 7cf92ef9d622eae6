#include "tokescale/multilingual.hpp"

#include <algorithm>
#include <istream>
#include <set>
#include <sstream>

#include "tokescale/errors.hpp"

namespace tokescale {

ParityTable estimate_parity(const std::vector<AlignedSentence>& parallel, const std::string& base) {
    std::map<std::string, std::map<std::string, std::size_t>> by_language;  // lang -> id -> bytes
    for (const auto& s : parallel) by_language[s.language][s.sentence_id] += s.bytes;

    auto base_it = by_language.find(base);
    if (base_it == by_language.end())
        throw AlignmentError("estimate_parity: base language '" + base + "' not in the corpus");
    const auto& base_sentences = base_it->second;

    ParityTable table;
    table.base_language = base;
    for (const auto& [lang, sentences] : by_language) {
        std::vector<std::string> missing;
        for (const auto& [id, bytes] : base_sentences)
            if (!sentences.contains(id)) missing.push_back(id);
        for (const auto& [id, bytes] : sentences)
            if (!base_sentences.contains(id)) missing.push_back(id);
        if (!missing.empty()) {
            std::sort(missing.begin(), missing.end());
            std::string list;
            for (std::size_t i = 0; i < missing.size() && i < 10; ++i)
                list += (i ? ", " : "") + missing[i];
            if (missing.size() > 10) list += ", ...";
            throw AlignmentError("estimate_parity: language '" + lang +
                                 "' misaligned with base; sentence ids: " + list);
        }
        std::size_t lang_bytes = 0, base_bytes = 0;
        for (const auto& [id, bytes] : sentences) {
            lang_bytes += bytes;
            base_bytes += base_sentences.at(id);
        }
        if (base_bytes == 0) throw DomainError("estimate_parity: base corpus has zero bytes");
        table.entries[lang] = double(lang_bytes) / double(base_bytes);
        table.n_sentences[lang] = sentences.size();
    }
    table.entries[base] = 1.0;  // exact by definition
    return table;
}

std::vector<std::uint8_t> inflate_bytes(const std::vector<std::uint8_t>& bytes, std::size_t stride) {
    if (stride == 0) throw DomainError("inflate_bytes: stride must be >= 1");
    std::vector<std::uint8_t> out;
    out.reserve(bytes.size() + bytes.size() / stride + 1);
    std::size_t run = 0;
    for (std::uint8_t b : bytes) {
        out.push_back(b);
        if (++run == stride) {
            out.push_back(0x00);
            run = 0;
        }
    }
    return out;
}

std::vector<std::uint8_t> strip_inflation(const std::vector<std::uint8_t>& bytes, std::size_t stride) {
    if (stride == 0) throw DomainError("strip_inflation: stride must be >= 1");
    std::vector<std::uint8_t> out;
    out.reserve(bytes.size());
    std::size_t run = 0;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (run == stride) {
            run = 0;  // dummy position
            continue;
        }
        out.push_back(bytes[i]);
        ++run;
    }
    return out;
}

LanguageReport language_report(const std::map<std::string, Isoflop3D>& fits,
                               const ParityTable& parity) {
    LanguageReport report;
    report.base_language = parity.base_language;

    auto base_fit = fits.find(parity.base_language);
    if (base_fit == fits.end())
        throw DomainError("language_report: no fit for base language '" + parity.base_language + "'");

    for (const auto& [lang, fit] : fits) {
        auto p = parity.entries.find(lang);
        if (p == parity.entries.end())
            throw DomainError("language_report: no parity entry for language '" + lang + "'");
        LanguageRow row;
        row.language = lang;
        row.parity = p->second;
        row.opt_bpp = fit.opt_bpp;
        row.opt_compression = fit.opt_compression;
        row.min_bpb = fit.opt_loss;
        row.bpp_ratio = fit.opt_bpp / base_fit->second.opt_bpp;
        row.compression_ratio = fit.opt_compression / base_fit->second.opt_compression;
        report.rows.push_back(row);
    }
    std::sort(report.rows.begin(), report.rows.end(),
              [](const LanguageRow& a, const LanguageRow& b) { return a.parity < b.parity; });
    return report;
}

std::map<std::string, double> mix_weights(const ParityTable& parity) {
    if (parity.entries.empty()) throw InsufficientDataError("mix_weights: empty parity table");
    double total = 0.0;
    for (const auto& [lang, p] : parity.entries) total += p;
    std::map<std::string, double> weights;
    for (const auto& [lang, p] : parity.entries) weights[lang] = p / total;
    return weights;
}

std::vector<AlignedSentence> parse_parallel_tsv(std::istream& in) {
    std::vector<AlignedSentence> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab1 = line.find('\t');
        auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos)
            throw ParseError(line_no, "(row)", "expected sentence_id<TAB>language<TAB>text");
        AlignedSentence s;
        s.sentence_id = line.substr(0, tab1);
        s.language = line.substr(tab1 + 1, tab2 - tab1 - 1);
        s.bytes = line.size() - tab2 - 1;
        if (s.sentence_id.empty()) throw ParseError(line_no, "sentence_id", "must be nonempty");
        if (s.language.empty()) throw ParseError(line_no, "language", "must be nonempty");
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace tokescale
