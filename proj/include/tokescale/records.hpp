#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tokescale {

enum class Family { LatentEntropy, LatentFixed, Subword };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// One logged training run. Loss is always stored as bits-per-byte; nats
/// must go through bpb_from_nats() at ingestion.
struct RunRecord {
    Family family = Family::LatentEntropy;
    double budget_flops = 0.0;   // total training compute C
    double compression = 0.0;    // bytes per token T
    std::optional<long> scale;   // recipe scale index s
    double latent_params = 0.0;  // global/latent module parameter count N
    std::optional<double> total_params;
    double bytes = 0.0;    // training bytes B
    double loss_bpb = 0.0; // validation loss L in bits per byte
    std::string language = "eng";
    std::optional<std::string> dataset;
    // Unknown columns/keys carried through serialization untouched.
    std::vector<std::pair<std::string, std::string>> extras;
};

struct GridReport {
    std::size_t n_records = 0;
    std::vector<double> budgets;       // distinct, sorted
    std::vector<double> compressions;  // distinct, sorted
    double max_flops_discrepancy = 0.0;
    std::vector<std::size_t> offending_records;
};

enum class RecordFormat { Csv, Jsonl };

inline constexpr const char* kRecordsCsvHeader =
    "family,budget_flops,compression,scale,latent_params,total_params,bytes,loss_bpb,language,dataset";

std::vector<RunRecord> parse_runs(std::istream& source, RecordFormat format);
std::vector<RunRecord> parse_runs(const std::string& text, RecordFormat format);

void serialize_runs(const std::vector<RunRecord>& records, std::ostream& out, RecordFormat format);
std::string serialize_runs(const std::vector<RunRecord>& records, RecordFormat format);

/// Flags records whose declared budget deviates from the approximate
/// compute 6*N*B/T by more than `tolerance` (relative). Report-only.
GridReport validate_grid(const std::vector<RunRecord>& records, double tolerance);

/// total_nll_nats / (ln 2 * n_bytes).
double bpb_from_nats(double total_nll_nats, double n_bytes);

/// Throws ValidationError if any RunRecord invariant fails.
void check_record(const RunRecord& record);

}  // namespace tokescale
