#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tokescale/isoflop.hpp"

namespace tokescale {

/// Corpus-level byte-length ratios against a base language, computed over
/// sentence-aligned parallel text.
struct ParityTable {
    std::string base_language;
    std::map<std::string, double> entries;       // language -> parity, base = 1.0
    std::map<std::string, std::size_t> n_sentences;
};

struct AlignedSentence {
    std::string sentence_id;
    std::string language;
    std::size_t bytes = 0;
};

struct LanguageRow {
    std::string language;
    double parity = 0.0;
    double opt_bpp = 0.0;
    double opt_compression = 0.0;
    double min_bpb = 0.0;
    double bpp_ratio = 0.0;  // vs base row
    double compression_ratio = 0.0;
};

struct LanguageReport {
    std::string base_language;
    std::vector<LanguageRow> rows;
};

ParityTable estimate_parity(const std::vector<AlignedSentence>& parallel, const std::string& base);

/// Doubles the byte length by inserting one 0x00 dummy after every `stride`
/// input bytes (stride 1 by default, giving exactly 2x inflation).
std::vector<std::uint8_t> inflate_bytes(const std::vector<std::uint8_t>& bytes, std::size_t stride = 1);

/// Removes the dummies inserted by inflate_bytes with the same stride.
std::vector<std::uint8_t> strip_inflation(const std::vector<std::uint8_t>& bytes, std::size_t stride = 1);

LanguageReport language_report(const std::map<std::string, Isoflop3D>& fits, const ParityTable& parity);

/// weight(l) = parity(l) / sum of parities; sums to 1.
std::map<std::string, double> mix_weights(const ParityTable& parity);

/// Parses TSV lines `sentence_id<TAB>language<TAB>text`; byte counts from
/// the UTF-8 text field.
std::vector<AlignedSentence> parse_parallel_tsv(std::istream& in);

}  // namespace tokescale
