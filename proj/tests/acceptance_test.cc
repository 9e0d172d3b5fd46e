// Copyright 2026 The compnet Authors
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


// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "compnet/cli.h"
#include "compnet/compiler.h"
#include "compnet/scenarios.h"
#include "compnet/topology_format.h"
#include "compnet/trace.h"
#include "compnet/validate.h"
#include "compnet/verifier.h"
#include "testing/mutants.h"
#include "testing/oracle.h"
#include "testing/random_topology.h"

namespace compnet {
namespace {

using testing::Mutant;

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void Note(const std::string& what) { notes.push_back(what); }
};

absl::StatusOr<PropertyResult> Named(const Topology& t, const std::string& name) {
  absl::StatusOr<std::vector<PropertyResult>> all = RunProperties(t);
  if (!all.ok()) return all.status();
  for (const PropertyResult& r : *all) {
    if (r.name == name) return r;
  }
  return absl::NotFoundError("no property " + name);
}

// The property holds on `t`.
void ExpectHolds(Verdict& v, const Topology& t, const std::string& name) {
  absl::StatusOr<PropertyResult> r = Named(t, name);
  v.Require(r.ok() && r->holds, name + " holds" +
                                    (r.ok() ? "" : ": " + r.status().ToString()));
}

// The property fails on the mutant and its witness replays.
void ExpectFailsAndReplays(Verdict& v, Mutant mutant, const std::string& name,
                           const std::string& label) {
  absl::StatusOr<Topology> t = testing::MutantTopology(mutant);
  if (!t.ok()) {
    v.Require(false, label + ": " + t.status().ToString());
    return;
  }
  v.Require(ValidateTopology(*t).ok(), label + " mutant is a valid topology");
  absl::StatusOr<PropertyResult> r = Named(*t, name);
  if (!r.ok()) {
    v.Require(false, label + ": " + r.status().ToString());
    return;
  }
  v.Require(!r->holds, name + " fails on " + label);
  absl::StatusOr<bool> replay = ReplayReproduces(*t, *r);
  v.Require(replay.ok() && *replay, name + " witness replays on " + label);
}

Verdict Walkthrough() {
  Verdict v;
  struct Step {
    std::string member, function, key;
  };
  const std::vector<Step> golden = {
      {"d", "Transmit", "4"},      {"p2", "Send", "PCd4e1"},
      {"p2", "Forward", "inLink=Self"}, {"p2", "Transmit", "5"},
      {"p2", "WireHop", "5"},      {"p3", "Acquire", "inLink=3"},
      {"p3", "Forward", "inLink=3"}, {"p3", "Transmit", "6"},
      {"p3", "WireHop", "6"},      {"p4", "Acquire", "inLink=2"},
      {"p4", "Receive", "PCd4e1"}, {"e", "Acquire", "inLink=7"},
      {"e", "Receive", "appde"},
  };
  std::ostringstream out, err;
  int code = RunCli({"trace", "scenario:service-customer", "--from", "d", "--net",
                     "custA", "--link", "4"},
                    out, err);
  v.Require(code == 0, "trace exits 0");
  std::vector<std::string> lines = absl::StrSplit(out.str(), '\n', absl::SkipEmpty());
  v.Require(lines.size() == golden.size() + 1, "13 events and an outcome line");
  for (size_t i = 0; i < golden.size() && i < lines.size(); ++i) {
    std::vector<std::string> tokens = absl::StrSplit(lines[i], ' ');
    bool ok = tokens.size() > 5 && tokens[0] == std::to_string(i + 1) &&
              tokens[3] == golden[i].member && tokens[4] == golden[i].function &&
              tokens[5] == golden[i].key;
    v.Require(ok, "step " + std::to_string(i + 1) + ": " + lines[i]);
  }
  v.Require(!lines.empty() && lines.back() == "outcome Delivered custA.e",
            "delivered at custA.e");
  v.Note("13 events");
  return v;
}

Verdict EnterpriseLemmas() {
  Verdict v;
  for (const char* id : {"enterprise-basic", "enterprise-vpn"}) {
    absl::StatusOr<Topology> t = Scenario(id);
    if (!t.ok()) {
      v.Require(false, t.status().ToString());
      continue;
    }
    for (const char* name : {"L1a", "L1b", "L1c", "L1d"}) {
      ExpectHolds(v, *t, name);
    }
  }
  ExpectFailsAndReplays(v, Mutant::kWaypointBypass, "L1a", "filter bypass");
  ExpectFailsAndReplays(v, Mutant::kEqualCostPaths, "L1b", "equal-cost paths");
  ExpectFailsAndReplays(v, Mutant::kNoAuthenticator, "L1c", "no authenticator");
  ExpectFailsAndReplays(v, Mutant::kRewritingBridge, "L1d", "rewriting bridge");
  v.Note("4 lemmas hold, 4 controls fail and replay");
  return v;
}

std::set<std::string> InsecureLinks(const Topology& t) {
  std::set<std::string> out;
  for (const auto& [id, link] : t.links.at(NetworkId("enterprise"))) {
    if (!Propagate(t, link).contains("secure")) out.insert(link.ref().ToString());
  }
  return out;
}

Verdict Propagation() {
  Verdict v;
  absl::StatusOr<Topology> t = Scenario("enterprise-vpn");
  if (!t.ok()) return {false, {t.status().ToString()}};
  ExpectHolds(v, *t, "L2");
  v.Require(InsecureLinks(*t).empty(), "every enterprise link is secure");
  absl::StatusOr<Topology> bare = testing::MutantTopology(Mutant::kNoSessionAxiom);
  if (!bare.ok()) return {false, {bare.status().ToString()}};
  absl::StatusOr<PropertyResult> r = Named(*bare, "L2");
  v.Require(r.ok() && !r->holds, "L2 fails without the axiom");
  v.Require(r.ok() && r->witness && r->witness->link &&
                r->witness->link->ToString() == "enterprise.EV",
            "witness link is enterprise.EV");
  v.Require(InsecureLinks(*bare) == std::set<std::string>{"enterprise.EV"},
            "enterprise.EV is the only insecure link");
  v.Note("witness enterprise.EV");
  return v;
}

Verdict Firewall() {
  Verdict v;
  absl::StatusOr<Topology> t = Scenario("enterprise-vpn");
  if (!t.ok()) return {false, {t.status().ToString()}};
  ExpectHolds(v, *t, "L3");
  ExpectFailsAndReplays(v, Mutant::kFirewallBypass, "L3", "firewall bypass");
  v.Note("holds; bypass control fails and replays");
  return v;
}

Verdict Fusion() {
  Verdict v;
  absl::StatusOr<Topology> t = Scenario("service-customer");
  if (!t.ok()) return {false, {t.status().ToString()}};
  const MachineId machine("mA");
  absl::StatusOr<StagePlan> unfused = Fuse(*t, machine);
  absl::StatusOr<StagePlan> fused = Fuse(*t, machine, DeriveAssumptions(*t, machine));
  if (!unfused.ok() || !fused.ok()) return {false, {"fuse failed"}};
  v.Require(unfused->stage_count == 8, "8 stages unfused, got " +
                                           std::to_string(unfused->stage_count));
  v.Require(fused->stage_count == 4,
            "4 stages fused, got " + std::to_string(fused->stage_count));
  uint64_t checked = 0;
  for (const StagePlan* plan : {&*unfused, &*fused}) {
    absl::StatusOr<EquivalenceReport> report = CheckEquivalence(*t, *plan);
    v.Require(report.ok() && report->equivalent,
              "equivalent" + (report.ok() ? " " + report->counterexample : ""));
    if (report.ok()) checked += report->packets_checked;
  }
  v.Note(absl::StrCat("8 -> 4 stages, ", checked, " packets compared"));
  return v;
}

Verdict Traceability() {
  Verdict v;
  absl::StatusOr<Topology> t = Scenario("service-hipaa");
  if (!t.ok()) return {false, {t.status().ToString()}};
  const NetworkId cust("custA"), service("service");
  const std::vector<FieldMap> universe =
      testing::EnumerateUniverse(t->networks.at(cust).schema);
  int crossed = 0, records = 0;
  for (const auto& [name, member] : t->members.at(cust)) {
    for (const FieldMap& header : universe) {
      absl::StatusOr<Trace> trace = Originate(*t, member.ref(), Packet(cust, header));
      if (!trace.ok()) {
        v.Require(false, trace.status().ToString());
        continue;
      }
      if (!trace->delivered()) continue;
      const TraceEvent* transmit = nullptr;
      const TraceEvent* send = nullptr;
      for (const TraceEvent& e : trace->events) {
        if (!transmit && e.function == Function::kTransmit && e.network == cust) {
          transmit = &e;
        }
        if (!send && e.function == Function::kSend && e.network == service) send = &e;
      }
      if (send == nullptr) continue;
      ++crossed;
      const std::string where =
          absl::StrCat(name.value(), " ", FieldMapToString(header));
      // The originating customer link, as the origin's Transmit chose it.
      const Link* origin_link =
          transmit ? t->LinkAt(member.ref(), LocalLinkId(transmit->key)) : nullptr;
      ProvenanceChain chain = Provenance(*t, *trace);
      v.Require(origin_link && chain.size() == 1 && chain[0].link == origin_link->ref(),
                "provenance names the customer link for " + where);
      // The tag, from the session identifier alone.
      const Session* session = t->FindSessionInGroup(send->network, SessionId(send->key));
      const Link* carried = session ? t->LinkForSession(session->ref()) : nullptr;
      const bool tagged = carried && carried->tags.contains("patient-record");
      const bool record = header.at("class") == "phi";
      if (record) ++records;
      v.Require(tagged == record, "patient-record tag from sessIdent for " + where);
    }
  }
  v.Require(crossed > 0 && records > 0 && records < crossed,
            "both record and non-record packets crossed");
  v.Note(absl::StrCat(crossed, " delivered packets, ", records, " records"));
  return v;
}

Verdict OracleEquivalence() {
  Verdict v;
  std::mt19937 rng(20261015);
  const int kTopologies = 120;
  int networks = 0, delivered = 0;
  for (int i = 0; i < kTopologies; ++i) {
    Topology t = testing::RandomTopology(rng);
    for (const auto& [net, unused] : t.networks) {
      ++networks;
      absl::StatusOr<PathSet> symbolic = Reachability(t, net);
      absl::StatusOr<testing::PathMap> brute = testing::BruteForceReachability(t, net);
      if (!symbolic.ok() || !brute.ok()) {
        v.Require(false, "reachability error on case " + std::to_string(i));
        continue;
      }
      testing::PathMap got;
      for (const SymbolicPath& p : symbolic->paths) {
        std::vector<std::string> names;
        for (const MemberName& m : p.members) names.push_back(m.value());
        if (p.end == SymbolicPath::End::kDelivered && p.members.size() > 1) ++delivered;
        for (const FieldMap& h : p.headers.Enumerate()) {
          got[{names, ToString(p.end)}].insert(h);
        }
      }
      if (got != *brute) {
        v.Require(false, absl::StrCat("case ", i, " network ", net.value(), "\n",
                                      SerializeTopology(t)));
      }
    }
  }
  v.Note(absl::StrCat(kTopologies, " topologies, ", networks, " networks, ",
                      delivered, " multi-hop delivered paths"));
  return v;
}

Verdict SeamSuite() {
  Verdict v;
  for (const std::string& id : ScenarioIds()) {
    absl::StatusOr<Topology> t = Scenario(id);
    v.Require(t.ok() && ValidateTopology(*t).ok(), id + " validates");
  }
  struct Case {
    Mutant mutant;
    ViolationCode code;
    const char* label;
  };
  for (const Case& c : {Case{Mutant::kDuplicateMapping, ViolationCode::kSeamBijection,
                             "duplicate session mapping"},
                        Case{Mutant::kDanglingSession, ViolationCode::kDanglingSession,
                             "dangling external session"},
                        Case{Mutant::kCrossNetworkLink, ViolationCode::kLinkEnd,
                             "cross-network link end"},
                        Case{Mutant::kSameNetworkImpl, ViolationCode::kSessionNetwork,
                             "session of the same network"}}) {
    absl::StatusOr<Topology> t = testing::MutantTopology(c.mutant);
    v.Require(t.ok() && ValidateTopology(*t).Has(c.code),
              std::string(c.label) + " is rejected");
  }
  v.Note("4 scenarios accepted, 4 mutants rejected");
  return v;
}

struct Criterion {
  const char* id;
  const char* title;
  double budget_seconds;
  std::function<Verdict()> run;
};

int Main() {
  const std::vector<Criterion> criteria = {
      {"AC1", "walkthrough fidelity", 1, Walkthrough},
      {"AC2", "enterprise lemma suite", 5, EnterpriseLemmas},
      {"AC3", "secure-link propagation", 5, Propagation},
      {"AC4", "firewall waypoint", 5, Firewall},
      {"AC5", "stage fusion", 30, Fusion},
      {"AC6", "traceability", 10, Traceability},
      {"AC7", "oracle equivalence", 60, OracleEquivalence},
      {"AC8", "seam suite", 5, SeamSuite},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Verdict v = c.run();
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget_seconds) {
      v.Require(false, absl::StrCat("runtime ", seconds, " s over ", c.budget_seconds,
                                    " s"));
    }
    if (!v.pass) ++failures;
    std::vector<std::string> shown;
    for (const std::string& note : v.notes) {
      if (v.pass || note.rfind("failed", 0) == 0) shown.push_back(note);
    }
    std::cout << c.id << " " << (v.pass ? "PASS" : "FAIL") << " " << c.title << " ("
              << absl::StrJoin(shown, "; ") << "; "
              << static_cast<int>(seconds * 1000) << " ms)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace compnet

int main() { return compnet::Main(); }
