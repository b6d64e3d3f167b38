#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "anchormc/consensus.hpp"

namespace anchormc {

// --- CSV data files ----------------------------------------------------------

// Dense numeric matrix, one observation per row, comma separated. An
// optional header row is skipped. Global ids 1..n are assigned in row order.
DpmData read_dpm_csv(const std::filesystem::path& path);
void write_dpm_csv(const std::filesystem::path& path, const DpmData& data);

// Long format (snv_id, sample_id, y, N), header optional.
FaData read_fa_csv(const std::filesystem::path& path);
void write_fa_csv(const std::filesystem::path& path, const FaData& data);

// Long format (patient_id, symptom_id, value) with value in {-1,0,1}.
DfaData read_dfa_csv(const std::filesystem::path& path);
void write_dfa_csv(const std::filesystem::path& path, const DfaData& data);

// --- JSON artifacts ----------------------------------------------------------

void write_shard_plan_json(const std::filesystem::path& path,
                           const ShardPlan& plan, std::uint64_t master_seed,
                           const std::string& config_hash);
ShardPlan read_shard_plan_json(const std::filesystem::path& path);

// Ground truth for scoring: an allocation matrix with per-subset parameters.
struct TruthFile {
  SubsetKind kind = SubsetKind::Partition;
  AllocationMatrix a;
  std::vector<SubsetParams> params;
};
void write_truth_json(const std::filesystem::path& path, const TruthFile& truth);
TruthFile read_truth_json(const std::filesystem::path& path);

FixedEntrySpec read_constraints_json(const std::filesystem::path& path);
void write_constraints_json(const std::filesystem::path& path,
                            const FixedEntrySpec& spec);

// --- JSON-lines samples -------------------------------------------------------

// One draw per line with fields (t, K, subsets, params, globals) plus
// provenance for consensus draws; the first line is a header object carrying
// the config hash and master seed so a run is reproducible from its outputs.
std::string sample_set_to_jsonl(const SampleSet& samples,
                                const std::string& config_hash,
                                std::uint64_t master_seed);
std::string consensus_to_jsonl(const std::vector<ConsensusDraw>& draws,
                               const std::string& model,
                               const std::string& config_hash,
                               std::uint64_t master_seed);

void write_sample_set_jsonl(const std::filesystem::path& path,
                            const SampleSet& samples,
                            const std::string& config_hash,
                            std::uint64_t master_seed);
void write_consensus_jsonl(const std::filesystem::path& path,
                           const std::vector<ConsensusDraw>& draws,
                           const std::string& model,
                           const std::string& config_hash,
                           std::uint64_t master_seed);

// Reads either a single-chain or a consensus sample file; provenance is
// dropped, header metadata is restored into SampleMeta where present.
SampleSet read_samples_jsonl(const std::filesystem::path& path);

// --- misc ---------------------------------------------------------------------

// FNV-1a hash of a canonical string rendering, hex encoded. Used to stamp
// output files with the configuration they came from.
std::string fnv1a_hex(const std::string& text);

}  // namespace anchormc
