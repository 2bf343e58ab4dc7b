// Copyright 2026 The bht-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BHT_CAMPAIGN_HPP_
#define BHT_CAMPAIGN_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bht/engine.hpp"
#include "bht/fault.hpp"
#include "bht/generator.hpp"
#include "bht/isa.hpp"

namespace bht {

struct Workload {
  std::string name;
  ProgramImage image;
  // Set for generated workloads; negative for hand-written ones.
  double yield_density = -1.0;
};

Workload load_workload(const std::filesystem::path& path);
Workload generated_workload(std::uint64_t seed, const GeneratorOptions& options);

enum class OutcomeClass : std::uint8_t {
  kNoFault,  // nothing struck: the fault-free baseline
  kMasked,
  kDetectedRecovered,
  kHangRecovered,
  kSdc,
  kFatal,
};

inline constexpr std::size_t kOutcomeClassCount = 6;

std::string_view to_string(OutcomeClass c);

// Classification of one finished trial:
//   aborted or retry exhaustion      -> FATAL
//   committed state differs (oracle)  -> SDC
//   no injection applied              -> NO_FAULT
//   applied, no retry                 -> MASKED
//   retried after a hang              -> HANG_RECOVERED
//   retried otherwise                 -> DETECTED_RECOVERED
OutcomeClass classify(std::span<const FaultEvent> injections,
                      std::span<const TreatmentOutcome> outcomes,
                      const std::optional<std::string>& oracle_diff, bool aborted = false);

struct CampaignConfig {
  std::vector<Workload> workloads;
  TreatmentConfig treatment;
  FaultPlan fault_plan;  // plan.seed is replaced by each trial's seed
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  unsigned jobs = 1;  // 0: one per hardware thread
  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> json_path;
  std::optional<std::filesystem::path> overhead_table_path;

  void validate() const;
};

// Reads a campaign JSON file. Relative workload and output paths resolve
// against the file's directory. `fallback_seed` applies when the file has
// no "seed" key.
CampaignConfig load_campaign_config(const std::filesystem::path& path,
                                    std::optional<std::uint64_t> fallback_seed = std::nullopt);
CampaignConfig parse_campaign_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir,
                                     std::optional<std::uint64_t> fallback_seed = std::nullopt);

// Injective in `trial` for a fixed master seed.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial);

struct TrialRow {
  std::uint64_t trial = 0;
  std::string workload;
  std::uint64_t seed = 0;
  std::uint64_t faults_applied = 0;
  std::string fault_summary;
  OutcomeClass outcome = OutcomeClass::kNoFault;
  std::uint64_t retries = 0;
  std::uint64_t instr_plain = 0;
  std::uint64_t instr_hardened = 0;
  double overhead = 0.0;
  std::uint64_t self_stop_pes = 0;
  std::uint64_t timer_stop_pes = 0;
  std::uint64_t self_stop_plain = 0;
  std::uint64_t self_stop_hardened = 0;
  std::uint64_t timer_stop_plain = 0;
  std::uint64_t timer_stop_hardened = 0;
  std::string detail;  // oracle difference or assertion text
};

struct CampaignAggregate {
  std::uint64_t trials = 0;
  std::array<std::uint64_t, kOutcomeClassCount> counts{};
  std::uint64_t faults_applied = 0;
  double mean_overhead = 0.0;
  double p95_overhead = 0.0;
  std::uint64_t self_stop_pes = 0;
  std::uint64_t timer_stop_pes = 0;
  double self_stop_share = 0.0;
  double self_stop_overhead = 0.0;
  double timer_stop_overhead = 0.0;

  std::uint64_t count(OutcomeClass c) const { return counts[static_cast<std::size_t>(c)]; }
  std::uint64_t sdc() const { return count(OutcomeClass::kSdc); }
  std::uint64_t fatal() const { return count(OutcomeClass::kFatal); }
};

CampaignAggregate aggregate(std::span<const TrialRow> rows);

struct CampaignReport {
  std::vector<TrialRow> rows;  // by trial index
  CampaignAggregate summary;

  // Columns: trial,workload,seed,faults_applied,fault_summary,outcome,
  // retries,instr_plain,instr_hardened,overhead,self_stop_pes,timer_stop_pes
  std::string to_csv() const;
  std::string to_json() const;
  // Whitespace-separated per-workload overhead table for gnuplot.
  std::string overhead_table() const;
};

// Runs every trial and aggregates. Engine assertion failures become FATAL
// rows and the campaign continues. Rows are identical for identical configs
// whatever `jobs` is.
CampaignReport run_campaign(const CampaignConfig& cfg);

// Writes the configured csv/json/overhead outputs, creating parent folders.
void write_reports(const CampaignReport& report, const CampaignConfig& cfg);

struct OverheadRow {
  std::string workload;
  std::uint32_t quantum = 0;
  double yield_density = -1.0;
  std::uint64_t instr_plain = 0;
  std::uint64_t instr_hardened = 0;
  double ratio = 0.0;
  std::uint64_t self_stop_pes = 0;
  std::uint64_t timer_stop_pes = 0;
  double self_stop_overhead = 0.0;
  double timer_stop_overhead = 0.0;
};

struct OverheadReport {
  std::vector<OverheadRow> rows;

  double mean_ratio() const;
  std::string to_table() const;
};

// Fault-free hardened/plain instruction ratios for every workload at every
// quantum (watchdog 4Q; commit cost model taken from `base`).
OverheadReport measure_overhead(std::span<const Workload> workloads,
                                std::span<const std::uint32_t> quanta,
                                const TreatmentConfig& base = {});

}  // namespace bht

#endif  // BHT_CAMPAIGN_HPP_
