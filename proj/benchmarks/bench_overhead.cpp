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


// Wall-clock cost of plain vs hardened execution. The simulated instruction
// ratio is reported as a counter next to the timing.

#include <benchmark/benchmark.h>

#include <map>
#include <string>

#include "bht/assembler.hpp"
#include "bht/campaign.hpp"
#include "bht/engine.hpp"
#include "bht/generator.hpp"

namespace {

using namespace bht;

const ProgramImage& corpus_program(const std::string& name) {
  static std::map<std::string, ProgramImage> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    it = cache.emplace(name, load_workload(std::string(BHT_CORPUS_DIR) + "/" + name + ".bhs").image)
             .first;
  }
  return it->second;
}

void BM_Plain(benchmark::State& state, const char* name) {
  const ProgramImage& p = corpus_program(name);
  std::uint64_t instr = 0;
  for (auto _ : state) {
    const PlainRun r = run_plain(p);
    instr = r.instr_count;
    benchmark::DoNotOptimize(r.outputs.data());
  }
  state.counters["sim_instr"] = static_cast<double>(instr);
}

void BM_Hardened(benchmark::State& state, const char* name) {
  const ProgramImage& p = corpus_program(name);
  const TreatmentConfig cfg = TreatmentConfig::for_quantum(static_cast<std::uint32_t>(state.range(0)));
  HardenedRunStats stats;
  for (auto _ : state) {
    const HardenedRun r = run_hardened(p, cfg);
    stats = r.stats;
    benchmark::DoNotOptimize(r.outputs.data());
  }
  state.counters["sim_instr"] = static_cast<double>(stats.hardened_instructions());
  state.counters["ratio"] = stats.overhead();
}

void BM_SingleFaultTrial(benchmark::State& state) {
  CampaignConfig cfg;
  GeneratorOptions opt;
  opt.size = static_cast<std::uint32_t>(state.range(0));
  opt.yield_density = 0.05;
  cfg.workloads.push_back(generated_workload(3, opt));
  cfg.fault_plan.mode = FaultMode::kSinglePerTreatment;
  cfg.trials = 1;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.master_seed = seed++;
    const CampaignReport r = run_campaign(cfg);
    benchmark::DoNotOptimize(r.summary.trials);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Plain, fib, "fib");
BENCHMARK_CAPTURE(BM_Plain, sieve, "sieve");
BENCHMARK_CAPTURE(BM_Plain, matmul, "matmul");
BENCHMARK_CAPTURE(BM_Hardened, fib, "fib")->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_Hardened, sieve, "sieve")->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_Hardened, matmul, "matmul")->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK(BM_SingleFaultTrial)->Arg(60)->Arg(240);

BENCHMARK_MAIN();
