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

#include "bht/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "bht/assembler.hpp"

namespace bht {
namespace {

using json = nlohmann::json;

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string summarize(std::span<const FaultEvent> events) {
  std::string out;
  for (const FaultEvent& e : events) {
    if (!e.applied) continue;
    if (!out.empty()) out += '|';
    out += "t" + std::to_string(e.treatment) + "a" + std::to_string(e.attempt) + ":" +
           std::string(to_string(e.phase)) + "@" + std::to_string(e.tick) + ":" +
           to_string(e.target);
  }
  return out.empty() ? "-" : out;
}

void add_workloads(const json& j, const std::filesystem::path& base, std::vector<Workload>& out) {
  if (j.is_string()) {
    out.push_back(load_workload(resolve(base, j.get<std::string>())));
    return;
  }
  if (!j.is_object()) throw std::invalid_argument("workload entries are paths or objects");
  if (j.contains("path")) {
    out.push_back(load_workload(resolve(base, j.at("path").get<std::string>())));
    return;
  }
  if (!j.contains("generate")) throw std::invalid_argument("workload needs \"path\" or \"generate\"");
  const json& g = j.at("generate");
  GeneratorOptions opt;
  opt.size = g.value("size", opt.size);
  opt.yield_density = g.value("yield_density", opt.yield_density);
  opt.page_count = g.value("page_count", opt.page_count);
  opt.loops = g.value("loops", opt.loops);
  const std::uint64_t seed = g.value("seed", std::uint64_t{0});
  const std::uint64_t count = g.value("count", std::uint64_t{1});
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(generated_workload(seed + i, opt));
}

TrialRow run_trial(const CampaignConfig& cfg, const Workload& w, const PlainRun& oracle,
                   std::uint64_t index) {
  TrialRow row;
  row.trial = index;
  row.workload = w.name;
  row.seed = trial_seed(cfg.master_seed, index);
  row.instr_plain = oracle.instr_count;

  FaultPlan plan = cfg.fault_plan;
  plan.seed = row.seed;
  FaultInjector injector(std::move(plan));
  try {
    const HardenedRun run = run_hardened(w.image, cfg.treatment, &injector);
    const bool aborted = run.status == HardenedStatus::kPeLimit;
    std::optional<std::string> diff = diff_against_oracle(run, oracle);
    row.outcome = classify(injector.log(), run.outcomes, diff, aborted);
    row.retries = run.stats.retries;
    row.instr_hardened = run.stats.hardened_instructions();
    row.self_stop_pes = run.stats.self_stop_pes;
    row.timer_stop_pes = run.stats.timer_stop_pes;
    row.self_stop_plain = run.stats.self_stop_plain;
    row.self_stop_hardened = run.stats.self_stop_hardened;
    row.timer_stop_plain = run.stats.timer_stop_plain;
    row.timer_stop_hardened = run.stats.timer_stop_hardened;
    if (aborted) {
      row.detail = "pe limit reached";
    } else if (diff) {
      row.detail = *diff;
    }
  } catch (const EngineAssertion& e) {
    row.outcome = OutcomeClass::kFatal;
    row.detail = std::string("assertion: ") + e.what();
  }
  row.faults_applied = injector.applied_count();
  row.fault_summary = summarize(injector.log());
  row.overhead = row.instr_plain == 0
                     ? 0.0
                     : static_cast<double>(row.instr_hardened) / static_cast<double>(row.instr_plain);
  return row;
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Workload load_workload(const std::filesystem::path& path) {
  Workload w;
  w.name = path.stem().string();
  w.image = assemble_file(path);
  return w;
}

Workload generated_workload(std::uint64_t seed, const GeneratorOptions& options) {
  Workload w;
  w.name = "gen" + std::to_string(seed) + "_n" + std::to_string(options.size) + "_y" +
           fixed(options.yield_density, 3);
  w.image = assemble(gen_program(seed, options));
  w.yield_density = options.yield_density;
  return w;
}

std::string_view to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::kNoFault: return "NO_FAULT";
    case OutcomeClass::kMasked: return "MASKED";
    case OutcomeClass::kDetectedRecovered: return "DETECTED_RECOVERED";
    case OutcomeClass::kHangRecovered: return "HANG_RECOVERED";
    case OutcomeClass::kSdc: return "SDC";
    case OutcomeClass::kFatal: return "FATAL";
  }
  return "?";
}

OutcomeClass classify(std::span<const FaultEvent> injections,
                      std::span<const TreatmentOutcome> outcomes,
                      const std::optional<std::string>& oracle_diff, bool aborted) {
  const bool exhausted = std::any_of(outcomes.begin(), outcomes.end(), [](const auto& o) {
    return o.status == TreatmentStatus::kFatalRetryExhausted;
  });
  if (aborted || exhausted) return OutcomeClass::kFatal;
  if (oracle_diff) return OutcomeClass::kSdc;
  const bool applied =
      std::any_of(injections.begin(), injections.end(), [](const auto& e) { return e.applied; });
  if (!applied) return OutcomeClass::kNoFault;
  bool retried = false;
  bool hang = false;
  for (const TreatmentOutcome& o : outcomes) {
    if (o.retries > 0) {
      retried = true;
      hang = hang || o.hang_detected;
    }
  }
  if (!retried) return OutcomeClass::kMasked;
  return hang ? OutcomeClass::kHangRecovered : OutcomeClass::kDetectedRecovered;
}

void CampaignConfig::validate() const {
  if (workloads.empty()) throw std::invalid_argument("campaign needs at least one workload");
  if (trials == 0) throw std::invalid_argument("campaign needs at least one trial");
  treatment.validate();
}

CampaignConfig parse_campaign_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir,
                                     std::optional<std::uint64_t> fallback_seed) {
  CampaignConfig cfg;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw std::invalid_argument("campaign config must be a JSON object");
    if (!j.contains("workloads") || !j.at("workloads").is_array()) {
      throw std::invalid_argument("campaign config needs a \"workloads\" array");
    }
    for (const json& w : j.at("workloads")) add_workloads(w, base_dir, cfg.workloads);

    if (j.contains("treatment")) {
      const json& t = j.at("treatment");
      cfg.treatment.quantum = t.value("quantum", cfg.treatment.quantum);
      cfg.treatment.watchdog = t.value("watchdog", std::uint64_t{4} * cfg.treatment.quantum);
      cfg.treatment.retry_limit = t.value("retry_limit", cfg.treatment.retry_limit);
      cfg.treatment.commit_cost.base = t.value("commit_base", cfg.treatment.commit_cost.base);
      cfg.treatment.commit_cost.per_dirty_page =
          t.value("commit_per_page", cfg.treatment.commit_cost.per_dirty_page);
      cfg.treatment.pe_limit = t.value("pe_limit", cfg.treatment.pe_limit);
    }
    if (j.contains("fault_plan")) cfg.fault_plan = parse_fault_plan(j.at("fault_plan").dump());
    cfg.trials = j.value("trials", cfg.trials);
    if (j.contains("seed")) {
      cfg.master_seed = j.at("seed").get<std::uint64_t>();
    } else if (fallback_seed) {
      cfg.master_seed = *fallback_seed;
    }
    cfg.jobs = j.value("jobs", cfg.jobs);
    if (j.contains("output")) {
      const json& o = j.at("output");
      if (o.contains("csv")) cfg.csv_path = resolve(base_dir, o.at("csv").get<std::string>());
      if (o.contains("json")) cfg.json_path = resolve(base_dir, o.at("json").get<std::string>());
      if (o.contains("overhead_table")) {
        cfg.overhead_table_path = resolve(base_dir, o.at("overhead_table").get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("campaign config: ") + e.what());
  } catch (const AssemblyError& e) {
    throw std::invalid_argument(std::string("campaign workload: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

CampaignConfig load_campaign_config(const std::filesystem::path& path,
                                    std::optional<std::uint64_t> fallback_seed) {
  return parse_campaign_config(read_text(path), path.parent_path(), fallback_seed);
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial) {
  // splitmix64 finalizer; bijective, and the odd stride keeps the input
  // injective in `trial`.
  std::uint64_t z = master_seed + trial * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

CampaignAggregate aggregate(std::span<const TrialRow> rows) {
  CampaignAggregate a;
  a.trials = rows.size();
  std::vector<double> overheads;
  overheads.reserve(rows.size());
  std::uint64_t self_plain = 0, self_hard = 0, timer_plain = 0, timer_hard = 0;
  double sum = 0.0;
  for (const TrialRow& r : rows) {
    ++a.counts[static_cast<std::size_t>(r.outcome)];
    a.faults_applied += r.faults_applied;
    overheads.push_back(r.overhead);
    sum += r.overhead;
    a.self_stop_pes += r.self_stop_pes;
    a.timer_stop_pes += r.timer_stop_pes;
    self_plain += r.self_stop_plain;
    self_hard += r.self_stop_hardened;
    timer_plain += r.timer_stop_plain;
    timer_hard += r.timer_stop_hardened;
  }
  if (!rows.empty()) {
    a.mean_overhead = sum / static_cast<double>(rows.size());
    std::sort(overheads.begin(), overheads.end());
    // Nearest-rank percentile.
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(rows.size())));
    a.p95_overhead = overheads[std::max<std::size_t>(rank, 1) - 1];
  }
  a.self_stop_share = ratio(a.self_stop_pes, a.self_stop_pes + a.timer_stop_pes);
  a.self_stop_overhead = ratio(self_hard, self_plain);
  a.timer_stop_overhead = ratio(timer_hard, timer_plain);
  return a;
}

std::string CampaignReport::to_csv() const {
  std::string out =
      "trial,workload,seed,faults_applied,fault_summary,outcome,retries,instr_plain,"
      "instr_hardened,overhead,self_stop_pes,timer_stop_pes\n";
  for (const TrialRow& r : rows) {
    out += std::to_string(r.trial) + "," + r.workload + "," + std::to_string(r.seed) + "," +
           std::to_string(r.faults_applied) + "," + r.fault_summary + "," +
           std::string(to_string(r.outcome)) + "," + std::to_string(r.retries) + "," +
           std::to_string(r.instr_plain) + "," + std::to_string(r.instr_hardened) + "," +
           fixed(r.overhead) + "," + std::to_string(r.self_stop_pes) + "," +
           std::to_string(r.timer_stop_pes) + "\n";
  }
  return out;
}

std::string CampaignReport::to_json() const {
  const CampaignAggregate& a = summary;
  json counts = json::object();
  for (std::size_t i = 0; i < kOutcomeClassCount; ++i) {
    counts[std::string(to_string(static_cast<OutcomeClass>(i)))] = a.counts[i];
  }
  json j;
  j["trials"] = a.trials;
  j["outcomes"] = counts;
  j["sdc"] = a.sdc();
  j["fatal"] = a.fatal();
  j["faults_applied"] = a.faults_applied;
  j["mean_overhead"] = a.mean_overhead;
  j["p95_overhead"] = a.p95_overhead;
  j["self_stop_pes"] = a.self_stop_pes;
  j["timer_stop_pes"] = a.timer_stop_pes;
  j["self_stop_share"] = a.self_stop_share;
  j["self_stop_overhead"] = a.self_stop_overhead;
  j["timer_stop_overhead"] = a.timer_stop_overhead;
  return j.dump(2) + "\n";
}

std::string CampaignReport::overhead_table() const {
  struct Sum {
    std::uint64_t n = 0, plain = 0, hardened = 0;
  };
  std::map<std::string, Sum> by_workload;
  for (const TrialRow& r : rows) {
    Sum& s = by_workload[r.workload];
    ++s.n;
    s.plain += r.instr_plain;
    s.hardened += r.instr_hardened;
  }
  std::string out = "# workload trials instr_plain instr_hardened overhead\n";
  for (const auto& [name, s] : by_workload) {
    out += name + " " + std::to_string(s.n) + " " + std::to_string(s.plain) + " " +
           std::to_string(s.hardened) + " " + fixed(ratio(s.hardened, s.plain)) + "\n";
  }
  return out;
}

CampaignReport run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  std::vector<PlainRun> oracles;
  oracles.reserve(cfg.workloads.size());
  for (const Workload& w : cfg.workloads) {
    oracles.push_back(run_plain(w.image));
    if (!oracles.back().state.halted) {
      throw std::invalid_argument("workload " + w.name + " does not halt");
    }
  }

  CampaignReport report;
  report.rows.resize(cfg.trials);
  unsigned jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
  jobs = static_cast<unsigned>(std::min<std::uint64_t>(jobs, cfg.trials));

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    try {
      for (std::uint64_t i = next++; i < cfg.trials; i = next++) {
        const std::size_t w = static_cast<std::size_t>(i % cfg.workloads.size());
        report.rows[i] = run_trial(cfg, cfg.workloads[w], oracles[w], i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = cfg.trials;
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  report.summary = aggregate(report.rows);
  return report;
}

void write_reports(const CampaignReport& report, const CampaignConfig& cfg) {
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
  };
  if (cfg.csv_path) write(*cfg.csv_path, report.to_csv());
  if (cfg.json_path) write(*cfg.json_path, report.to_json());
  if (cfg.overhead_table_path) write(*cfg.overhead_table_path, report.overhead_table());
}

}  // namespace bht
