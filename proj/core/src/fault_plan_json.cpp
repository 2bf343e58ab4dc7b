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

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bht/fault.hpp"

namespace bht {
namespace {

using nlohmann::json;

Phase phase_from_string(const std::string& s) {
  if (s == "run1") return Phase::kRun1;
  if (s == "run2") return Phase::kRun2;
  if (s == "verify_commit" || s == "verify") return Phase::kVerifyCommit;
  throw std::invalid_argument("unknown phase '" + s + "'");
}

FaultTarget target_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto bit = j.at("bit").get<std::uint32_t>();
  if (kind == "register") return RegisterBit{j.at("index").get<std::uint32_t>(), bit};
  if (kind == "pc") return PcBit{bit};
  if (kind == "memory") {
    return MemoryBit{j.at("page").get<std::uint32_t>(), j.at("word").get<std::uint32_t>(), bit};
  }
  if (kind == "digest") return DigestBit{j.at("byte").get<std::uint32_t>(), bit};
  if (kind == "store") {
    return StoreBit{j.at("page").get<std::uint32_t>(), j.at("word").get<std::uint32_t>(), bit};
  }
  throw std::invalid_argument("unknown fault target kind '" + kind + "'");
}

json target_to_json(const FaultTarget& t) {
  if (const auto* r = std::get_if<RegisterBit>(&t)) {
    return {{"kind", "register"}, {"index", r->index}, {"bit", r->bit}};
  }
  if (const auto* p = std::get_if<PcBit>(&t)) return {{"kind", "pc"}, {"bit", p->bit}};
  if (const auto* m = std::get_if<MemoryBit>(&t)) {
    return {{"kind", "memory"}, {"page", m->page}, {"word", m->word}, {"bit", m->bit}};
  }
  if (const auto* d = std::get_if<DigestBit>(&t)) {
    return {{"kind", "digest"}, {"byte", d->byte}, {"bit", d->bit}};
  }
  const auto& s = std::get<StoreBit>(t);
  return {{"kind", "store"}, {"page", s.page}, {"word", s.word}, {"bit", s.bit}};
}

}  // namespace

FaultPlan parse_fault_plan(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("fault plan is not valid JSON: ") + e.what());
  }
  try {
    FaultPlan plan;
    plan.mode = fault_mode_from_string(j.value("mode", std::string("none")));
    plan.seed = j.value("seed", std::uint64_t{0});
    plan.probability = j.value("probability", 1.0);
    plan.rate = j.value("rate", 0.0);
    plan.multi_count = j.value("multi_count", std::uint32_t{2});
    if (j.contains("events")) {
      for (const json& e : j.at("events")) {
        FaultEvent ev;
        ev.treatment = e.at("treatment").get<std::uint64_t>();
        ev.attempt = e.value("attempt", std::uint32_t{0});
        ev.phase = phase_from_string(e.at("phase").get<std::string>());
        ev.tick = e.at("tick").get<std::uint64_t>();
        ev.target = target_from_json(e.at("target"));
        plan.script.push_back(ev);
      }
      if (!j.contains("mode")) plan.mode = FaultMode::kScripted;
    }
    return plan;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed fault plan: ") + e.what());
  }
}

FaultPlan load_fault_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fault plan " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_fault_plan(buf.str());
}

std::string fault_plan_to_json(const FaultPlan& plan) {
  json j = {{"mode", std::string(to_string(plan.mode))},
            {"seed", plan.seed},
            {"probability", plan.probability},
            {"rate", plan.rate},
            {"multi_count", plan.multi_count}};
  if (!plan.script.empty()) {
    json events = json::array();
    for (const FaultEvent& e : plan.script) {
      events.push_back({{"treatment", e.treatment},
                        {"attempt", e.attempt},
                        {"phase", std::string(to_string(e.phase))},
                        {"tick", e.tick},
                        {"target", target_to_json(e.target)}});
    }
    j["events"] = std::move(events);
  }
  return j.dump(2);
}

}  // namespace bht
