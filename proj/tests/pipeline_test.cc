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


#include <variant>

#include "compnet/pipeline.h"
#include "compnet/scenarios.h"
#include "gtest/gtest.h"

namespace compnet {
namespace {

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    absl::StatusOr<Topology> t = Scenario("service-customer");
    ASSERT_TRUE(t.ok()) << t.status();
    t_ = *std::move(t);
  }
  const Member& M(const char* net, const char* name) {
    return *t_.FindMember({NetworkId(net), MemberName(name)});
  }
  Packet CustPacket(const char* src, const char* dst) {
    Packet p(NetworkId("custA"), {{"src", src}, {"dst", dst}, {"sess", "appde"}});
    p.meta().in_link = SelfLink();
    return p;
  }
  Topology t_;
};

TEST_F(PipelineTest, ForwardPicksOutLink) {
  absl::StatusOr<StepResult> r = FnForward(t_, M("custA", "d"), CustPacket("d", "e"));
  ASSERT_TRUE(r.ok()) << r.status();
  const Next* next = std::get_if<Next>(&r->outcome);
  ASSERT_NE(next, nullptr);
  EXPECT_EQ(next->function, Function::kTransmit);
  EXPECT_EQ(next->link, LocalLinkId("4"));
  EXPECT_EQ(r->key, "inLink=Self");
}

TEST_F(PipelineTest, ForwardWithoutMatchingRuleIsNoRule) {
  absl::StatusOr<StepResult> r = FnForward(t_, M("custA", "d"), CustPacket("d", "d"));
  ASSERT_TRUE(r.ok());
  const Dropped* dropped = std::get_if<Dropped>(&r->outcome);
  ASSERT_NE(dropped, nullptr);
  EXPECT_EQ(dropped->marker, DropMarker::kNoRule);
  EXPECT_EQ(dropped->function, Function::kForward);
  EXPECT_EQ(r->action, "no-rule");
}

TEST_F(PipelineTest, TransmitOverSessionHandsToSend) {
  absl::StatusOr<StepResult> r =
      FnTransmit(t_, M("custA", "d"), CustPacket("d", "e"), LocalLinkId("4"));
  ASSERT_TRUE(r.ok()) << r.status();
  const Next* next = std::get_if<Next>(&r->outcome);
  ASSERT_NE(next, nullptr);
  EXPECT_EQ(next->function, Function::kSend);
  EXPECT_EQ(next->member.ToString(), "service.p2");
  EXPECT_EQ(r->packet.meta().sess_ident, SessionId("PCd4e1"));
}

TEST_F(PipelineTest, TransmitPrimitiveEmits) {
  Packet p(NetworkId("service"), {{"dst", "p4"}});
  absl::StatusOr<StepResult> r = FnTransmit(t_, M("service", "p2"), p, LocalLinkId("5"));
  ASSERT_TRUE(r.ok());
  const Emit* emit = std::get_if<Emit>(&r->outcome);
  ASSERT_NE(emit, nullptr);
  EXPECT_EQ(emit->port, "5");
}

TEST_F(PipelineTest, TransmitUnknownLinkIsNoRule) {
  absl::StatusOr<StepResult> r =
      FnTransmit(t_, M("custA", "d"), CustPacket("d", "e"), LocalLinkId("9"));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(std::get<Dropped>(r->outcome).marker, DropMarker::kNoRule);
}

TEST_F(PipelineTest, SendEncapsulatesWithTemplate) {
  Packet p = CustPacket("d", "e");
  p.meta().sess_ident = SessionId("PCd4e1");
  absl::StatusOr<StepResult> r = FnSend(t_, M("service", "p2"), p);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->packet.depth(), 2u);
  EXPECT_EQ(r->packet.network(), NetworkId("service"));
  EXPECT_EQ(r->packet.header().at("dst"), "p4");
  EXPECT_FALSE(r->packet.outer().sealed_by.has_value());
  EXPECT_EQ(r->packet.meta().in_link, SelfLink());
  EXPECT_EQ(std::get<Next>(r->outcome).function, Function::kForward);
}

TEST_F(PipelineTest, SendWithoutSessionIdentIsAPreconditionError) {
  absl::StatusOr<StepResult> r = FnSend(t_, M("service", "p2"), CustPacket("d", "e"));
  EXPECT_EQ(r.status().code(), absl::StatusCode::kFailedPrecondition);
}

TEST_F(PipelineTest, WrongNetworkIsAPreconditionError) {
  Packet p(NetworkId("service"), {{"dst", "p4"}});
  EXPECT_EQ(FnForward(t_, M("custA", "d"), p).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(FnAcquire(t_, M("custA", "d"), p, LocalLinkId("4")).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(FnReceive(t_, M("custA", "d"), p).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST_F(PipelineTest, AcquireHonoursInLink) {
  Packet p(NetworkId("service"), {{"dst", "p4"}});
  absl::StatusOr<StepResult> r = FnAcquire(t_, M("service", "p3"), p, LocalLinkId("3"));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(std::get<Next>(r->outcome).function, Function::kForward);
  EXPECT_EQ(r->packet.meta().in_link, LocalLinkId("3"));
  r = FnAcquire(t_, M("service", "p3"), p, LocalLinkId("6"));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(std::get<Dropped>(r->outcome).marker, DropMarker::kNoRule);
}

TEST_F(PipelineTest, ReceiveDecapsulatesOntoTheLink) {
  Packet p = CustPacket("d", "e");
  p.meta().sess_ident = SessionId("PCd4e1");
  absl::StatusOr<StepResult> sent = FnSend(t_, M("service", "p2"), p);
  ASSERT_TRUE(sent.ok());
  absl::StatusOr<StepResult> r = FnReceive(t_, M("service", "p4"), sent->packet);
  ASSERT_TRUE(r.ok()) << r.status();
  const Next& next = std::get<Next>(r->outcome);
  EXPECT_EQ(next.function, Function::kAcquire);
  EXPECT_EQ(next.member.ToString(), "custA.e");
  EXPECT_EQ(next.link, LocalLinkId("7"));
  EXPECT_EQ(r->packet.depth(), 1u);
  EXPECT_FALSE(r->packet.meta().sess_ident.has_value());
}

TEST_F(PipelineTest, ReceiveDeliversLocally) {
  absl::StatusOr<StepResult> r = FnReceive(t_, M("custA", "e"), CustPacket("d", "e"));
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(std::holds_alternative<Delivered>(r->outcome));
}

TEST_F(PipelineTest, ReceiveWithoutInnerPacketIsMalformed) {
  Packet p(NetworkId("service"),
           {{"src", "p2"}, {"dst", "p4"}, {"srcPort", "PCd4e1"}, {"dstPort", "custA"}});
  absl::StatusOr<StepResult> r = FnReceive(t_, M("service", "p4"), p);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(std::get<Dropped>(r->outcome).marker, DropMarker::kMalformed);
}

TEST_F(PipelineTest, ReceiveUnknownSessionIsNoRule) {
  Packet p(NetworkId("custA"), {{"src", "d"}, {"dst", "e"}, {"sess", "other"}});
  absl::StatusOr<StepResult> r = FnReceive(t_, M("custA", "e"), p);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(std::get<Dropped>(r->outcome).marker, DropMarker::kNoRule);
}

TEST_F(PipelineTest, ApplyDispatchesAndChecksArguments) {
  Next next{Function::kForward, {NetworkId("custA"), MemberName("d")}, std::nullopt};
  ASSERT_TRUE(Apply(t_, next, CustPacket("d", "e")).ok());
  next.function = Function::kAcquire;
  EXPECT_EQ(Apply(t_, next, CustPacket("d", "e")).status().code(),
            absl::StatusCode::kInvalidArgument);
  next.member.name = MemberName("ghost");
  EXPECT_EQ(Apply(t_, next, CustPacket("d", "e")).status().code(),
            absl::StatusCode::kNotFound);
}

TEST(BridgeTest, RewritesOnlyFromTheMatchingSide) {
  absl::StatusOr<Topology> t = Scenario("enterprise-vpn");
  ASSERT_TRUE(t.ok());
  const Bridge& nat = t->bridges.at(0);
  MemberRef r{NetworkId("coffeeIP"), MemberName("R")};
  MemberRef n{NetworkId("publicIP"), MemberName("N")};
  Packet out = CrossBridge(nat, r, Packet(NetworkId("coffeeIP"), {{"src", "X"}, {"dst", "S"}}));
  EXPECT_EQ(out.network(), NetworkId("publicIP"));
  EXPECT_EQ(out.header().at("src"), "N");
  EXPECT_EQ(out.header().at("dst"), "S");
  Packet back = CrossBridge(nat, n, Packet(NetworkId("publicIP"), {{"src", "S"}, {"dst", "N"}}));
  EXPECT_EQ(back.network(), NetworkId("coffeeIP"));
  EXPECT_EQ(back.header().at("dst"), "X");
  EXPECT_EQ(back.header().at("src"), "S");
}

TEST(VisibilityTest, SealedLayersHideInnerHeaders) {
  absl::StatusOr<Topology> t = Scenario("service-hipaa");
  ASSERT_TRUE(t.ok());
  Packet p(NetworkId("custA"), {{"dst", "e"}, {"class", "phi"}});
  p.Encapsulate(NetworkId("service"), {{"dst", "p4"}},
                SessionRef{NetworkId("service"), SessionId("PCd4e2")});
  Snapshot middle = VisibleTo(*t, p, MachineId("mB"));
  EXPECT_TRUE(middle.sealed);
  ASSERT_EQ(middle.visible.size(), 1u);
  EXPECT_EQ(middle.visible[0].network, NetworkId("service"));
  Snapshot endpoint = VisibleTo(*t, p, MachineId("mC"));
  EXPECT_FALSE(endpoint.sealed);
  EXPECT_EQ(endpoint.visible.size(), 2u);
}

}  // namespace
}  // namespace compnet
