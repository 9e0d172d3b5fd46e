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


#include <random>
#include <string>
#include <vector>

#include "absl/strings/match.h"
#include "compnet/compiler.h"
#include "compnet/scenarios.h"
#include "compnet/topology_format.h"
#include "gtest/gtest.h"
#include "testing/random_topology.h"

namespace compnet {
namespace {

std::vector<Assumption> Parse(const std::vector<std::string>& texts) {
  std::vector<Assumption> out;
  for (const std::string& text : texts) {
    absl::StatusOr<Assumption> a = ParseAssumption(text);
    EXPECT_TRUE(a.ok()) << text << ": " << a.status();
    if (a.ok()) out.push_back(*a);
  }
  return out;
}

class ServiceMachineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    absl::StatusOr<Topology> t = Scenario("service-customer");
    ASSERT_TRUE(t.ok());
    t_ = *std::move(t);
  }
  Topology t_;
};

TEST_F(ServiceMachineTest, UnfusedPipelineHasEightStages) {
  absl::StatusOr<StagePlan> plan = Fuse(t_, MachineId("mA"));
  ASSERT_TRUE(plan.ok()) << plan.status();
  EXPECT_EQ(plan->stage_count, 8);
  EXPECT_EQ(plan->nodes.size(), 10u);
  EXPECT_GE(plan->NodeIndex({NetworkId("custA"), MemberName("d")}, Function::kTransmit), 0);
  EXPECT_EQ(plan->NodeIndex({NetworkId("custA"), MemberName("e")}, Function::kTransmit), -1);
}

TEST_F(ServiceMachineTest, BothFactsFuseToFourStages) {
  std::vector<Assumption> facts =
      Parse({"links-external:d:p2", "links-primitive:p2"});
  for (const Assumption& a : facts) {
    EXPECT_TRUE(CheckAssumption(t_, MachineId("mA"), a).ok()) << a.ToString();
  }
  absl::StatusOr<StagePlan> plan = Fuse(t_, MachineId("mA"), facts);
  ASSERT_TRUE(plan.ok()) << plan.status();
  EXPECT_EQ(plan->stage_count, 4);
  absl::StatusOr<EquivalenceReport> report = CheckEquivalence(t_, *plan);
  ASSERT_TRUE(report.ok()) << report.status();
  EXPECT_TRUE(report->equivalent) << report->counterexample;
  EXPECT_GT(report->packets_checked, 0u);
}

TEST_F(ServiceMachineTest, OneFactAlone) {
  absl::StatusOr<StagePlan> external =
      Fuse(t_, MachineId("mA"), Parse({"links-external:d:p2"}));
  ASSERT_TRUE(external.ok());
  EXPECT_LT(external->stage_count, 8);
  EXPECT_GT(external->stage_count, 4);
}

TEST_F(ServiceMachineTest, DerivedFactsMatchTheExplicitOnes) {
  std::vector<Assumption> derived = DeriveAssumptions(t_, MachineId("mA"));
  absl::StatusOr<StagePlan> plan = Fuse(t_, MachineId("mA"), derived);
  ASSERT_TRUE(plan.ok());
  EXPECT_EQ(plan->stage_count, 4);
}

TEST_F(ServiceMachineTest, InvalidAssumptionIsRejected) {
  std::vector<Assumption> bad = Parse({"links-primitive:d"});
  ASSERT_EQ(bad.size(), 1u);
  absl::Status s = CheckAssumption(t_, MachineId("mA"), bad[0]);
  EXPECT_EQ(s.code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_TRUE(absl::StrContains(std::string(s.message()), "InvalidAssumption")) << s;
  absl::StatusOr<StagePlan> plan = Fuse(t_, MachineId("mA"), bad);
  EXPECT_EQ(plan.status().code(), absl::StatusCode::kFailedPrecondition);
}

TEST_F(ServiceMachineTest, UnknownMachine) {
  EXPECT_EQ(Fuse(t_, MachineId("nowhere")).status().code(), absl::StatusCode::kNotFound);
}

TEST(AssumptionTest, ParseAndPrint) {
  absl::StatusOr<Assumption> a = ParseAssumption("links-external:custA:service");
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a->kind, Assumption::Kind::kLinksExternal);
  EXPECT_EQ(a->overlay, "custA");
  EXPECT_EQ(a->underlay, "service");
  EXPECT_EQ(a->ToString(), "links-external:custA:service");
  EXPECT_FALSE(ParseAssumption("links-sideways:x").ok());
  EXPECT_FALSE(ParseAssumption("links-external:onlyone").ok());
}

TEST_F(ServiceMachineTest, FusedRunMatchesUnfusedOnTheCustomerPacket) {
  absl::StatusOr<StagePlan> plan =
      Fuse(t_, MachineId("mA"), DeriveAssumptions(t_, MachineId("mA")));
  ASSERT_TRUE(plan.ok());
  Packet p(NetworkId("custA"), {{"src", "d"}, {"dst", "e"}, {"sess", "appde"}});
  p.meta().in_link = SelfLink();
  Ingress ingress{{NetworkId("custA"), MemberName("d")}, Function::kForward, SelfLink()};
  absl::StatusOr<MachineResult> unfused = RunUnfused(t_, ingress, p);
  absl::StatusOr<MachineResult> fused = RunFused(*plan, ingress, p);
  ASSERT_TRUE(unfused.ok()) << unfused.status();
  ASSERT_TRUE(fused.ok()) << fused.status();
  const Emit* emit = std::get_if<Emit>(&unfused->outcome);
  ASSERT_NE(emit, nullptr) << ToString(unfused->outcome);
  EXPECT_EQ(emit->port, "5");
  EXPECT_EQ(fused->outcome, unfused->outcome);
  EXPECT_TRUE(SameOnWire(fused->packet, unfused->packet));
  EXPECT_EQ(fused->packet.depth(), 2u);
}

// A wrong compiled rule must be caught by the equivalence check.
TEST_F(ServiceMachineTest, CorruptedRuleIsDetected) {
  absl::StatusOr<StagePlan> plan =
      Fuse(t_, MachineId("mA"), DeriveAssumptions(t_, MachineId("mA")));
  ASSERT_TRUE(plan.ok());
  int corrupted = 0;
  for (Stage& stage : plan->stages) {
    for (FusedRule& rule : stage.rules) {
      if (rule.action.kind == FusedAction::Kind::kEmit && corrupted == 0) {
        rule.action.port = "99";
        ++corrupted;
      }
    }
  }
  ASSERT_EQ(corrupted, 1);
  absl::StatusOr<EquivalenceReport> report = CheckEquivalence(t_, *plan);
  ASSERT_TRUE(report.ok());
  EXPECT_FALSE(report->equivalent);
  EXPECT_FALSE(report->counterexample.empty());
}

TEST_F(ServiceMachineTest, DroppedGuardIsDetected) {
  absl::StatusOr<StagePlan> plan =
      Fuse(t_, MachineId("mA"), DeriveAssumptions(t_, MachineId("mA")));
  ASSERT_TRUE(plan.ok());
  bool removed = false;
  for (Stage& stage : plan->stages) {
    for (FusedRule& rule : stage.rules) {
      if (removed) break;
      for (auto it = rule.ops.begin(); it != rule.ops.end(); ++it) {
        if (it->kind == FusedOp::Kind::kGuardMatch && !it->match.fields.empty() &&
            rule.action.kind == FusedAction::Kind::kEmit) {
          rule.ops.erase(it);
          removed = true;
          break;
        }
      }
    }
  }
  ASSERT_TRUE(removed);
  absl::StatusOr<EquivalenceReport> report = CheckEquivalence(t_, *plan);
  ASSERT_TRUE(report.ok());
  EXPECT_FALSE(report->equivalent);
}

TEST(CompilerTest, EveryScenarioMachineIsEquivalent) {
  for (const std::string& id : ScenarioIds()) {
    absl::StatusOr<Topology> t = Scenario(id);
    ASSERT_TRUE(t.ok());
    for (const auto& [machine, unused] : t->machines) {
      for (bool fused : {false, true}) {
        std::vector<Assumption> facts;
        if (fused) facts = DeriveAssumptions(*t, machine);
        absl::StatusOr<StagePlan> plan = Fuse(*t, machine, facts);
        ASSERT_TRUE(plan.ok()) << id << " " << machine << ": " << plan.status();
        absl::StatusOr<EquivalenceReport> report = CheckEquivalence(*t, *plan);
        ASSERT_TRUE(report.ok()) << report.status();
        EXPECT_TRUE(report->equivalent)
            << id << " " << machine << ": " << report->counterexample;
      }
    }
  }
}

TEST(CompilerTest, VpnGatewayAndLaptop) {
  absl::StatusOr<Topology> t = Scenario("enterprise-vpn");
  ASSERT_TRUE(t.ok());
  for (const char* machine : {"laptop", "vpnbox"}) {
    absl::StatusOr<StagePlan> unfused = Fuse(*t, MachineId(machine));
    absl::StatusOr<StagePlan> fused =
        Fuse(*t, MachineId(machine), DeriveAssumptions(*t, MachineId(machine)));
    ASSERT_TRUE(unfused.ok() && fused.ok());
    EXPECT_LT(fused->stage_count, unfused->stage_count) << machine;
  }
}

TEST(ExportTest, DeterministicAndComplete) {
  absl::StatusOr<Topology> t = Scenario("service-customer");
  ASSERT_TRUE(t.ok());
  std::vector<Assumption> facts = DeriveAssumptions(*t, MachineId("mA"));
  absl::StatusOr<std::string> a = ExportTables(*t, MachineId("mA"), facts);
  absl::StatusOr<std::string> b = ExportTables(*t, MachineId("mA"), facts);
  ASSERT_TRUE(a.ok()) << a.status();
  ASSERT_TRUE(b.ok());
  EXPECT_EQ(*a, *b);
  for (const char* section : {"[custA.d forward]", "[custA.d transmit]",
                              "[service.p2 send]", "[service.p2 receive]",
                              "[plan]", "stages: 4"}) {
    EXPECT_TRUE(absl::StrContains(*a, section)) << section << "\n" << *a;
  }
  // Serializing and re-parsing the topology does not change the export.
  absl::StatusOr<Topology> again = ParseTopology(SerializeTopology(*t));
  ASSERT_TRUE(again.ok());
  absl::StatusOr<std::string> c = ExportTables(*again, MachineId("mA"), facts);
  ASSERT_TRUE(c.ok());
  EXPECT_EQ(*a, *c);
}

TEST(StatsTest, CountsRules) {
  absl::StatusOr<Topology> t = Scenario("service-customer");
  ASSERT_TRUE(t.ok());
  absl::StatusOr<RuleStats> stats = ComputeRuleStats(*t);
  ASSERT_TRUE(stats.ok());
  uint64_t sum = 0;
  for (const auto& [net, count] : stats->per_network) sum += count;
  EXPECT_EQ(sum, stats->total);
  EXPECT_EQ(stats->total, 24u);
  EXPECT_GE(stats->flattened, stats->total);
  EXPECT_GT(stats->fused, 0u);
}

// Soundness on generated layered topologies: the fused plan of every
// machine, under the identity and under every derivable fact, behaves like
// the unfused pipeline.
TEST(CompilerProperty, FusionIsSoundOnRandomTopologies) {
  std::mt19937 rng(8080);
  testing::RandomTopologyOptions options;
  options.external_link_probability = 0.7;
  int fused_machines = 0;
  for (int i = 0; i < 60; ++i) {
    Topology t = testing::RandomTopology(rng, options);
    for (const auto& [machine, unused] : t.machines) {
      std::vector<Assumption> derived = DeriveAssumptions(t, machine);
      for (const std::vector<Assumption>& facts :
           {std::vector<Assumption>{}, derived}) {
        absl::StatusOr<StagePlan> plan = Fuse(t, machine, facts);
        ASSERT_TRUE(plan.ok()) << plan.status();
        absl::StatusOr<EquivalenceReport> report = CheckEquivalence(t, *plan);
        ASSERT_TRUE(report.ok()) << report.status();
        ASSERT_TRUE(report->equivalent)
            << "case " << i << " " << machine << ": " << report->counterexample
            << "\n" << SerializeTopology(t);
      }
      if (!derived.empty()) ++fused_machines;
    }
  }
  EXPECT_GT(fused_machines, 10);
}

}  // namespace
}  // namespace compnet
