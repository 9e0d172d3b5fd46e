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
#include "absl/strings/str_split.h"
#include "compnet/scenarios.h"
#include "compnet/topology_format.h"
#include "compnet/trace.h"
#include "gtest/gtest.h"
#include "nlohmann/json.hpp"
#include "testing/oracle.h"
#include "testing/random_topology.h"

namespace compnet {
namespace {

struct Step {
  const char* machine;
  const char* network;
  const char* member;
  Function function;
  const char* key;
};

// The customer packet from d to e over the service network, step by step.
const std::vector<Step>& GoldenSteps() {
  static const auto* const kSteps = new std::vector<Step>{
      {"mA", "custA", "d", Function::kTransmit, "4"},
      {"mA", "service", "p2", Function::kSend, "PCd4e1"},
      {"mA", "service", "p2", Function::kForward, "inLink=Self"},
      {"mA", "service", "p2", Function::kTransmit, "5"},
      {"mA", "service", "p2", Function::kWireHop, "5"},
      {"mB", "service", "p3", Function::kAcquire, "inLink=3"},
      {"mB", "service", "p3", Function::kForward, "inLink=3"},
      {"mB", "service", "p3", Function::kTransmit, "6"},
      {"mB", "service", "p3", Function::kWireHop, "6"},
      {"mC", "service", "p4", Function::kAcquire, "inLink=2"},
      {"mC", "service", "p4", Function::kReceive, "PCd4e1"},
      {"mC", "custA", "e", Function::kAcquire, "inLink=7"},
      {"mC", "custA", "e", Function::kReceive, "appde"},
  };
  return *kSteps;
}

Packet CustomerPacket() {
  return Packet(NetworkId("custA"), {{"src", "d"}, {"dst", "e"}, {"sess", "appde"}});
}

MemberRef Ref(const char* net, const char* name) {
  return {NetworkId(net), MemberName(name)};
}

TEST(GoldenTraceTest, CustomerPacketAcrossTheServiceNetwork) {
  absl::StatusOr<Topology> t = Scenario("service-customer");
  ASSERT_TRUE(t.ok());
  absl::StatusOr<Trace> trace =
      Inject(*t, Ref("custA", "d"), CustomerPacket(), LocalLinkId("4"));
  ASSERT_TRUE(trace.ok()) << trace.status();
  const std::vector<Step>& golden = GoldenSteps();
  ASSERT_EQ(trace->events.size(), golden.size()) << FormatTrace(*t, *trace);
  for (size_t i = 0; i < golden.size(); ++i) {
    const TraceEvent& e = trace->events[i];
    SCOPED_TRACE(::testing::Message() << "step " << i + 1);
    EXPECT_EQ(e.step, static_cast<int>(i + 1));
    EXPECT_EQ(e.machine.value(), golden[i].machine);
    EXPECT_EQ(e.network.value(), golden[i].network);
    EXPECT_EQ(e.member.value(), golden[i].member);
    EXPECT_EQ(e.function, golden[i].function);
    EXPECT_EQ(e.key, golden[i].key);
  }
  EXPECT_TRUE(trace->delivered());
  EXPECT_EQ(trace->outcome.member, Ref("custA", "e"));
  EXPECT_EQ(trace->events[1].action,
            "encap dst=p4 dstPort=custA src=p2 srcPort=PCd4e1");
  EXPECT_EQ(trace->events[10].action, "link custA.de");
  EXPECT_EQ(trace->final_packet.layers(), CustomerPacket().layers());
}

TEST(GoldenTraceTest, TextFormat) {
  absl::StatusOr<Topology> t = Scenario("service-customer");
  ASSERT_TRUE(t.ok());
  absl::StatusOr<Trace> trace =
      Inject(*t, Ref("custA", "d"), CustomerPacket(), LocalLinkId("4"));
  ASSERT_TRUE(trace.ok());
  std::string text = FormatTrace(*t, *trace);
  std::vector<std::string> lines = absl::StrSplit(text, '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 14u);
  EXPECT_EQ(lines[0],
            "1 mA custA d Transmit 4 -> session service.PCd4e1 | "
            "header=src=d,dst=e,sess=appde");
  EXPECT_TRUE(absl::StartsWith(lines[1], "2 mA service p2 Send PCd4e1 -> encap "));
  EXPECT_TRUE(absl::StrContains(lines[1], "| inner=src=d,dst=e,sess=appde"));
  EXPECT_EQ(lines[13], "outcome Delivered custA.e");
}

TEST(GoldenTraceTest, OriginateStartsWithForward) {
  absl::StatusOr<Topology> t = Scenario("service-customer");
  ASSERT_TRUE(t.ok());
  absl::StatusOr<Trace> trace = Originate(*t, Ref("custA", "d"), CustomerPacket());
  ASSERT_TRUE(trace.ok());
  ASSERT_EQ(trace->events.size(), GoldenSteps().size() + 1);
  EXPECT_EQ(trace->events[0].function, Function::kForward);
  EXPECT_EQ(trace->events[0].key, "inLink=Self");
  EXPECT_TRUE(trace->delivered());
}

TEST(TraceJsonTest, CarriesTheSameData) {
  absl::StatusOr<Topology> t = Scenario("service-customer");
  ASSERT_TRUE(t.ok());
  absl::StatusOr<Trace> trace =
      Inject(*t, Ref("custA", "d"), CustomerPacket(), LocalLinkId("4"));
  ASSERT_TRUE(trace.ok());
  nlohmann::json j = nlohmann::json::parse(TraceToJson(*t, *trace));
  ASSERT_EQ(j["events"].size(), trace->events.size());
  EXPECT_EQ(j["events"][1]["function"], "Send");
  EXPECT_EQ(j["events"][1]["key"], "PCd4e1");
  EXPECT_EQ(j["events"][1]["layers"].size(), 2u);
  EXPECT_EQ(j["events"][1]["layers"][0]["header"]["dst"], "p4");
  EXPECT_EQ(j["outcome"]["kind"], "Delivered");
  EXPECT_EQ(j["outcome"]["member"], "custA.e");
}

constexpr char kWire[] = R"(
networks { n dst:address(a b) sess:sessionId(s1); }
machines { ma; mb; }
members { n.a machine=ma; n.b machine=mb; }
links { n.ab a:1 b:1 impl=primitive; }
tables {
  transmit n.a 1 -> primitive 1;
  acquire n.b 10 dst=b -> receive;
  acquire n.b 5 * -> forward;
  receive n.b s1 -> primitive;
  forward n.b 10 * -> out 1;
  transmit n.b 1 -> primitive 1;
  acquire n.a 10 * -> forward;
  forward n.a 10 * -> out 1;
}
)";

TEST(TraceTest, SingleHopPrimitiveDelivery) {
  absl::StatusOr<Topology> t = ParseTopology(kWire);
  ASSERT_TRUE(t.ok()) << t.status();
  absl::StatusOr<Trace> trace = Inject(
      *t, Ref("n", "a"), Packet(NetworkId("n"), {{"dst", "b"}, {"sess", "s1"}}),
      LocalLinkId("1"));
  ASSERT_TRUE(trace.ok());
  std::vector<Function> functions;
  for (const TraceEvent& e : trace->events) functions.push_back(e.function);
  EXPECT_EQ(functions, (std::vector<Function>{Function::kTransmit, Function::kWireHop,
                                              Function::kAcquire, Function::kReceive}));
  EXPECT_TRUE(trace->delivered());
  EXPECT_TRUE(Provenance(*t, *trace).empty());
}

TEST(TraceTest, LoopIsDetectedWithinMaxHops) {
  absl::StatusOr<Topology> t = ParseTopology(kWire);
  ASSERT_TRUE(t.ok());
  TraceOptions options;
  options.max_hops = 5;
  absl::StatusOr<Trace> trace = Inject(
      *t, Ref("n", "a"), Packet(NetworkId("n"), {{"dst", "a"}, {"sess", "s1"}}),
      LocalLinkId("1"), options);
  ASSERT_TRUE(trace.ok());
  EXPECT_EQ(trace->outcome.kind, TraceOutcome::Kind::kLoopDetected);
  int transmits = 0;
  for (const TraceEvent& e : trace->events) {
    if (e.function == Function::kTransmit) ++transmits;
  }
  EXPECT_LE(transmits, options.max_hops + 1);
  EXPECT_TRUE(absl::StrContains(FormatTrace(*t, *trace), "outcome LoopDetected"));
}

TEST(TraceTest, DropCarriesTheMarker) {
  absl::StatusOr<Topology> t = Scenario("service-customer");
  ASSERT_TRUE(t.ok());
  absl::StatusOr<Trace> trace = Originate(
      *t, Ref("custA", "d"),
      Packet(NetworkId("custA"), {{"src", "d"}, {"dst", "d"}, {"sess", "appde"}}));
  ASSERT_TRUE(trace.ok());
  EXPECT_EQ(trace->outcome.kind, TraceOutcome::Kind::kDropped);
  EXPECT_EQ(trace->outcome.marker, DropMarker::kNoRule);
  EXPECT_EQ(trace->outcome.function, Function::kForward);
}

TEST(TraceTest, UnknownOriginIsAnError) {
  absl::StatusOr<Topology> t = Scenario("service-customer");
  ASSERT_TRUE(t.ok());
  EXPECT_FALSE(Originate(*t, Ref("custA", "zz"), CustomerPacket()).ok());
}

TEST(ProvenanceTest, CustomerPacket) {
  absl::StatusOr<Topology> t = Scenario("service-customer");
  ASSERT_TRUE(t.ok());
  absl::StatusOr<Trace> trace =
      Inject(*t, Ref("custA", "d"), CustomerPacket(), LocalLinkId("4"));
  ASSERT_TRUE(trace.ok());
  EXPECT_EQ(Provenance(*t, *trace),
            (ProvenanceChain{{LinkRef{NetworkId("custA"), LinkId("de")},
                              SessionRef{NetworkId("service"), SessionId("PCd4e1")}}}));
  EXPECT_EQ(ProjectPath(*trace, NetworkId("service")),
            (std::vector<MemberName>{MemberName("p2"), MemberName("p3"),
                                     MemberName("p4")}));
  EXPECT_EQ(ProjectPath(*trace, NetworkId("custA")),
            (std::vector<MemberName>{MemberName("d"), MemberName("e")}));
}

TEST(ProvenanceTest, RemoteAccessThroughTheNat) {
  absl::StatusOr<Topology> t = Scenario("enterprise-vpn");
  ASSERT_TRUE(t.ok());
  absl::StatusOr<Trace> trace = Originate(
      *t, Ref("enterprise", "E"),
      Packet(NetworkId("enterprise"),
             {{"src", "E"}, {"dst", "D"}, {"sess", "tcpED"}, {"tos", "0"}}));
  ASSERT_TRUE(trace.ok());
  ASSERT_TRUE(trace->delivered()) << FormatTrace(*t, *trace);
  EXPECT_EQ(trace->outcome.member, Ref("enterprise", "D"));
  ProvenanceChain chain = Provenance(*t, *trace);
  ASSERT_EQ(chain.size(), 1u);
  EXPECT_EQ(chain[0].link.ToString(), "enterprise.EV");
  EXPECT_EQ(chain[0].session.ToString(), "publicIP.ipsecXS");
  bool rewrote = false;
  for (const TraceEvent& e : trace->events) {
    if (e.function == Function::kBridgeRewrite) rewrote = true;
  }
  EXPECT_TRUE(rewrote);
}

// Opacity: an event at a machine that is not an endpoint of the encrypting
// session never shows the encapsulated record.
TEST(OpacityTest, PatientRecordsStaySealedInTransit) {
  absl::StatusOr<Topology> t = Scenario("service-hipaa");
  ASSERT_TRUE(t.ok());
  absl::StatusOr<Trace> trace = Originate(
      *t, Ref("custA", "d"),
      Packet(NetworkId("custA"),
             {{"src", "d"}, {"dst", "e"}, {"sess", "appde"}, {"class", "phi"}}));
  ASSERT_TRUE(trace.ok());
  ASSERT_TRUE(trace->delivered());
  int middle_events = 0;
  for (const TraceEvent& e : trace->events) {
    if (e.machine != MachineId("mB")) continue;
    ++middle_events;
    EXPECT_TRUE(e.snapshot.sealed);
    for (const Layer& layer : e.snapshot.visible) {
      EXPECT_NE(layer.network, NetworkId("custA"));
    }
  }
  EXPECT_GT(middle_events, 0);
  EXPECT_TRUE(absl::StrContains(FormatTrace(*t, *trace), "<sealed>"));
}

// Invariants over every originated header of generated topologies: traces
// terminate, the table functions other than Send and Receive never change
// the outer header, Send adds one layer, Receive removes at most one, and
// delivered packets arrive unwrapped.
TEST(TraceProperty, LayerDisciplineOnRandomTopologies) {
  std::mt19937 rng(99);
  for (int i = 0; i < 60; ++i) {
    Topology t = testing::RandomTopology(rng);
    for (const auto& [net, members] : t.members) {
      const std::vector<FieldMap> universe =
          testing::EnumerateUniverse(t.networks.at(net).schema);
      for (const auto& [name, member] : members) {
        for (const FieldMap& header : universe) {
          absl::StatusOr<Trace> trace =
              Originate(t, member.ref(), Packet(net, header));
          ASSERT_TRUE(trace.ok()) << trace.status() << "\n" << SerializeTopology(t);
          size_t depth = 1;
          FieldMap outer = header;
          for (const TraceEvent& e : trace->events) {
            const Layer& now = e.snapshot.visible.front();
            size_t now_depth = e.snapshot.sealed ? 0 : e.snapshot.visible.size();
            switch (e.function) {
              case Function::kSend:
                if (now_depth != 0) EXPECT_EQ(now_depth, depth + 1);
                ++depth;
                break;
              case Function::kReceive:
                if (e.action.find("link") == 0) {
                  if (now_depth != 0) EXPECT_EQ(now_depth, depth - 1);
                  --depth;
                } else if (now_depth != 0) {
                  EXPECT_EQ(now_depth, depth);
                }
                break;
              case Function::kBridgeRewrite:
                break;
              default:
                EXPECT_EQ(now.header, outer) << FormatTrace(t, *trace);
            }
            outer = now.header;
          }
          if (trace->delivered()) {
            EXPECT_EQ(trace->final_packet.depth(), 1u) << FormatTrace(t, *trace);
            EXPECT_EQ(trace->final_packet.network(), net);
          }
        }
      }
    }
  }
}

}  // namespace
}  // namespace compnet
