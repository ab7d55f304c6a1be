#include "opforge/graph.hpp"

#include <gtest/gtest.h>

#include "opforge/errors.hpp"

namespace opforge {
namespace {

Node instance_node(const std::string& id, const std::string& inst, const std::string& cont) {
  return Node{id, count_path(inst, cont), NodeKind::kInstance, false};
}

// a = 3, b = 2a, c = a + b (explicit sum), query c.
ComputationGraph small_chain() {
  ComputationGraph g;
  g.add_node(instance_node("a", "eagle", "Zoo"));
  g.add_node(instance_node("b", "owl", "Zoo"));
  g.add_node(instance_node("c", "crow", "Zoo"));
  g.add_edge({"a", RelationKind::kConstAssign, {}, 3});
  g.add_edge({"b", RelationKind::kScale, {"a"}, 2});
  g.add_edge({"c", RelationKind::kSumList, {"a", "b"}, 0});
  g.query = "c";
  return g;
}

TEST(EntityPath, ArityMatchesSegmentCount) {
  EXPECT_EQ(count_path("owl", "Zoo").arity(), ArityClass::kTwoEntity);
  EXPECT_EQ(rate_path("children", "owl", "Zoo").arity(), ArityClass::kThreeEntity);
  EXPECT_EQ(symbolic_path("V1").arity(), ArityClass::kSymbolic);
  EXPECT_THROW(EntityPath{}.arity(), GraphError);
}

TEST(EntityPath, RateAndAttrTotalStayDistinct) {
  EXPECT_NE(rate_path("children", "owl", "Zoo").key(),
            attr_total_path("children", "owl", "Zoo").key());
}

TEST(Graph, RejectsDuplicateIdAndPath) {
  ComputationGraph g;
  g.add_node(instance_node("a", "eagle", "Zoo"));
  EXPECT_THROW(g.add_node(instance_node("a", "owl", "Zoo")), GraphError);
  EXPECT_THROW(g.add_node(instance_node("b", "eagle", "Zoo")), GraphError);
}

TEST(Graph, RejectsSecondDefinition) {
  ComputationGraph g;
  g.add_node(instance_node("a", "eagle", "Zoo"));
  g.add_edge({"a", RelationKind::kConstAssign, {}, 1});
  EXPECT_THROW(g.add_edge({"a", RelationKind::kConstAssign, {}, 2}), GraphError);
}

TEST(Graph, SetConstLiteralRewritesInPlace) {
  ComputationGraph g = small_chain();
  g.set_const_literal("a", 5);
  EXPECT_EQ(evaluate(g, "c"), 15);
  EXPECT_THROW(g.set_const_literal("b", 1), GraphError);  // b is not a const
  EXPECT_THROW(g.set_const_literal("zz", 1), GraphError);
}

TEST(Validate, ReportsCycleWithoutThrowing) {
  ComputationGraph g;
  g.add_node(instance_node("a", "eagle", "Zoo"));
  g.add_node(instance_node("b", "owl", "Zoo"));
  g.add_edge({"a", RelationKind::kCopy, {"b"}, 0});
  g.add_edge({"b", RelationKind::kCopy, {"a"}, 0});
  const auto report = validate_dag(g);
  EXPECT_FALSE(report.ok);
  EXPECT_FALSE(report.cycle.empty());
}

TEST(Validate, ThrowsOnMissingSource) {
  ComputationGraph g;
  g.add_node(instance_node("a", "eagle", "Zoo"));
  g.add_edge({"a", RelationKind::kCopy, {"ghost"}, 0});
  EXPECT_THROW(validate_dag(g), GraphError);
}

TEST(Topo, RootLastAndDeterministic) {
  const ComputationGraph g = small_chain();
  const auto order = topo_order(g);
  ASSERT_EQ(order.size(), 3u);
  EXPECT_EQ(order.back(), "c");
  EXPECT_EQ(order, topo_order(g));
}

TEST(OpCost, MatchesRelationTable) {
  EXPECT_EQ(op_cost(RelationKind::kConstAssign, 0), 0);
  EXPECT_EQ(op_cost(RelationKind::kCopy, 1), 0);
  EXPECT_EQ(op_cost(RelationKind::kScale, 1), 1);
  EXPECT_EQ(op_cost(RelationKind::kAddConst, 1), 1);
  EXPECT_EQ(op_cost(RelationKind::kDifference, 2), 1);
  EXPECT_EQ(op_cost(RelationKind::kSumList, 4), 3);
  EXPECT_EQ(op_cost(RelationKind::kScaledSum, 3), 3);
  EXPECT_EQ(op_cost(RelationKind::kImplicitSum, 2), 1);
  EXPECT_EQ(op_cost(RelationKind::kImplicitProduct, 2), 1);
}

TEST(OpCount, CountsClosureOnly) {
  ComputationGraph g = small_chain();
  // Dangling extra work outside the query closure.
  g.add_node(instance_node("d", "finch", "Zoo"));
  g.add_edge({"d", RelationKind::kScale, {"c"}, 3});
  EXPECT_EQ(op_count(g), 2);   // scale 1 + sum-2 1; query still c
  EXPECT_EQ(op_count(g, "d"), 3);
  EXPECT_EQ(op_count(g, "a"), 0);
}

TEST(OpCount, InvariantUnderRelabeling) {
  const ComputationGraph g = small_chain();
  ComputationGraph renamed;
  renamed.query = "z2";
  renamed.add_node(instance_node("z0", "eagle", "Zoo"));
  renamed.add_node(instance_node("z1", "owl", "Zoo"));
  renamed.add_node(instance_node("z2", "crow", "Zoo"));
  renamed.add_edge({"z0", RelationKind::kConstAssign, {}, 3});
  renamed.add_edge({"z1", RelationKind::kScale, {"z0"}, 2});
  renamed.add_edge({"z2", RelationKind::kSumList, {"z0", "z1"}, 0});
  EXPECT_EQ(op_count(g), op_count(renamed));
  EXPECT_TRUE(equivalent_structure(g, renamed));
  EXPECT_FALSE(structural_equal(g, renamed));  // ids differ
}

TEST(CoreSubgraph, StripsNoiseAndIsIdempotent) {
  ComputationGraph g = small_chain();
  Node z = instance_node("z0", "heron", "Zoo");
  z.noise = true;
  g.add_node(z);
  g.add_edge({"z0", RelationKind::kScale, {"b"}, 4});
  const ComputationGraph core = core_subgraph(g);
  EXPECT_EQ(core.nodes().size(), 3u);
  EXPECT_TRUE(structural_equal(core, core_subgraph(core)));
  EXPECT_EQ(op_count(g), op_count(core));
}

TEST(Evaluate, AppliesEveryRelationKind) {
  ComputationGraph g;
  g.add_node(instance_node("a", "eagle", "Zoo"));
  g.add_node(instance_node("b", "owl", "Zoo"));
  g.add_node(instance_node("c", "crow", "Zoo"));
  g.add_node(instance_node("d", "finch", "Zoo"));
  g.add_node(instance_node("e", "heron", "Zoo"));
  g.add_edge({"a", RelationKind::kConstAssign, {}, 5});
  g.add_edge({"b", RelationKind::kAddConst, {"a"}, 2});        // 7
  g.add_edge({"c", RelationKind::kDifference, {"b", "a"}, 0});  // 2
  g.add_edge({"d", RelationKind::kScaledSum, {"a", "c"}, 3});   // 21
  g.add_edge({"e", RelationKind::kCopy, {"d"}, 0});
  EXPECT_EQ(evaluate(g, "e"), 21);
}

TEST(Evaluate, ImplicitRelations) {
  ComputationGraph g;
  g.add_node(instance_node("a", "eagle", "Zoo"));
  g.add_node(instance_node("b", "owl", "Zoo"));
  g.add_node({"t", abstract_total_path("adult animals", "Zoo"), NodeKind::kAbstract, false});
  g.add_node({"r", rate_path("children", "eagle", "Zoo"), NodeKind::kInstance, false});
  g.add_node({"p", attr_total_path("children", "eagle", "Zoo"), NodeKind::kAbstract, false});
  g.add_edge({"a", RelationKind::kConstAssign, {}, 4});
  g.add_edge({"b", RelationKind::kConstAssign, {}, 6});
  g.add_edge({"t", RelationKind::kImplicitSum, {"a", "b"}, 0});
  g.add_edge({"r", RelationKind::kConstAssign, {}, 3});
  g.add_edge({"p", RelationKind::kImplicitProduct, {"r", "a"}, 0});
  EXPECT_EQ(evaluate(g, "t"), 10);
  EXPECT_EQ(evaluate(g, "p"), 12);
}

TEST(Evaluate, MissingLeafNamesTheNode) {
  ComputationGraph g;
  g.add_node(instance_node("a", "eagle", "Zoo"));
  g.add_node(instance_node("b", "owl", "Zoo"));
  g.add_edge({"b", RelationKind::kScale, {"a"}, 2});
  try {
    evaluate(g, "b");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("a"), std::string::npos);
  }
  EXPECT_EQ(evaluate(g, "b", {{"a", 7}}), 14);
}

TEST(ApplyRelation, OverflowIsDataError) {
  ComputationGraph g;
  g.add_node(instance_node("a", "eagle", "Zoo"));
  g.add_node(instance_node("b", "owl", "Zoo"));
  g.add_edge({"a", RelationKind::kConstAssign, {}, (std::int64_t{1} << 62)});
  g.add_edge({"b", RelationKind::kScale, {"a"}, 8});
  EXPECT_THROW(evaluate(g, "b"), DataError);
}

TEST(VerifyValues, CatchesCorruption) {
  ValuedGraph v{small_chain(), {{"a", 3}, {"b", 6}, {"c", 9}}};
  EXPECT_NO_THROW(verify_values(v));
  v.values["b"] = 7;
  EXPECT_THROW(verify_values(v), DataError);
}

TEST(EvaluationRoot, ReverseUsesAnchor) {
  ComputationGraph g = small_chain();
  EXPECT_EQ(g.evaluation_root(), "c");
  g.mode = Mode::kReverse;
  g.query = "a";  // masked leaf
  g.anchor = Anchor{"c", 9};
  EXPECT_EQ(g.evaluation_root(), "c");
}

}  // namespace
}  // namespace opforge
