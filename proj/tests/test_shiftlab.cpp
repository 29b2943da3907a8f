#include <gtest/gtest.h>

#include "leiblab/shiftlab.hpp"

using namespace leiblab;
using namespace leiblab::shiftlab;

namespace {

std::string describe_failures(const Report& r) { return report_to_json(r, true).dump(1); }

}  // namespace

TEST(GaussRational, Arithmetic) {
  const GaussRational i(0, 1);
  EXPECT_EQ(i * i, GaussRational(-1));
  const GaussRational z(Rational(1, 2), Rational(-3, 4));
  EXPECT_EQ(z * z.conj(), GaussRational(z.norm_squared()));
  EXPECT_EQ(z.norm_squared(), Rational(13, 16));
  EXPECT_TRUE((z - z).is_zero());
}

TEST(FinVec, NoStoredZeros) {
  FinVec v = FinVec::basis(3) + FinVec::basis(-2);
  v = v - FinVec::basis(3);
  EXPECT_EQ(v.support().size(), 1u);
  EXPECT_EQ(v, FinVec::basis(-2));
  EXPECT_TRUE((GaussRational(0) * v).is_zero());
  EXPECT_EQ(inner(FinVec::basis(1), FinVec::basis(1)), GaussRational(1));
  EXPECT_EQ(inner(FinVec::basis(1), FinVec::basis(2)), GaussRational(0));
}

TEST(Apply, GeneratorExamples) {
  EXPECT_EQ(ShiftOp::B()(FinVec::basis(0)), FinVec::basis(1));
  EXPECT_EQ(ShiftOp::J()(FinVec::basis(3)), FinVec::basis(-3));
  EXPECT_TRUE(ShiftOp::P()(FinVec::basis(-1)).is_zero());
  EXPECT_EQ(ShiftOp::P()(FinVec::basis(0)), FinVec::basis(0));
  EXPECT_EQ(ShiftOp::Binv()(FinVec::basis(0)), FinVec::basis(-1));
}

TEST(Apply, Linearity) {
  const ShiftOp op = parse_expression("2*B*J + 1/3i*P - B'^");
  const FinVec u = GaussRational(Rational(2, 7)) * FinVec::basis(4) + FinVec::basis(-1);
  const FinVec v = GaussRational(0, 5) * FinVec::basis(0);
  const GaussRational c(Rational(-1, 2), 3);
  EXPECT_EQ(op(c * u + v), c * op(u) + op(v));
}

TEST(ShiftOp, StructuralAdjoint) {
  const ShiftOp ops[] = {ShiftOp::B(),
                         ShiftOp::J() * ShiftOp::B() * ShiftOp::P(),
                         ShiftOp::B() * ShiftOp::P() * ShiftOp::J() + GaussRational(2, -1) * ShiftOp::Binv(),
                         parse_expression("(B + i*J)*(P - B')"),
                         ShiftExampleOps{}.R};
  for (const auto& op : ops) {
    const Report r = verify_adjoint(op, 12);
    EXPECT_TRUE(r.passed()) << describe_failures(r);
  }
}

TEST(ShiftOp, GeneratorRelations) {
  const Report r = verify_generator_relations(64);
  EXPECT_TRUE(r.passed()) << describe_failures(r);
}

TEST(ShiftOp, SupportRadiusBoundHoldsAndIsTight) {
  const ShiftOp jb = ShiftOp::J() * ShiftOp::B();
  EXPECT_EQ(jb.depth(), 2);
  EXPECT_EQ(jb.support_radius(3), 4);
  EXPECT_EQ(jb(FinVec::basis(3)), FinVec::basis(-4));
  // J moves e_n to e_{-n}: a depth-1 expression can move an index by 2|n|.
  EXPECT_EQ(ShiftOp::J()(FinVec::basis(5)).max_abs_index(), 5);
  const ShiftOp op = parse_expression("B*B*J + B'*P*B'");
  for (Index n = -20; n <= 20; ++n) EXPECT_LE(op(FinVec::basis(n)).max_abs_index(), op.support_radius(n < 0 ? -n : n));
}

TEST(ShiftExample, NamedIdentities) {
  const ShiftExampleOps ops;
  const FinVec e0 = FinVec::basis(0);
  EXPECT_EQ((ops.R.adjoint() * ops.R)(e0).at(0), GaussRational(2));
  EXPECT_EQ((ops.R.adjoint() * ops.R)(e0), GaussRational(2) * e0);
  EXPECT_TRUE(ops.R.adjoint()(e0).is_zero());
  EXPECT_EQ(ops.S.adjoint()(FinVec::basis(5)), (ops.V * ops.T * ops.W)(FinVec::basis(5)));
}

TEST(ShiftExample, VerifyOnWindow) {
  const Report r = verify_example_61(64);
  EXPECT_TRUE(r.passed()) << describe_failures(r);
  EXPECT_EQ(r.entries.size(), 129u * 6 + 2);
  EXPECT_THROW(verify_example_61(3), MalformedInput);
}

TEST(ShiftExample, BrokenIdentityIsReported) {
  // R R* is not invertible: R R* e_n vanishes for some n, unlike R* R.
  const ShiftExampleOps ops;
  const ShiftOp rrs = ops.R * ops.R.adjoint();
  bool found_kernel = false;
  for (Index n = -4; n <= 4; ++n) found_kernel |= rrs(FinVec::basis(n)).is_zero();
  EXPECT_TRUE(found_kernel);
  Report r{"probe", 1, {}};
  r.record("deliberately false", 0, FinVec::basis(0), FinVec::basis(1));
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.failures(), 1u);
}

TEST(BlockUnitary, Examples) {
  const ShiftExampleOps ops;
  const ShiftOp tst = ops.T.adjoint() * ops.T;
  EXPECT_EQ(tst(FinVec::basis(-2)), FinVec::basis(-2));
  EXPECT_TRUE(tst(FinVec::basis(1)).is_zero());
  const BlockOp u = example_block_unitary();
  const FinPair top{FinVec::basis(0), FinVec()};
  const FinPair got = (u.adjoint() * u).apply(top);
  EXPECT_EQ(got.first, FinVec::basis(0));
  EXPECT_TRUE(got.second.is_zero());
  const ShiftOp defect = ShiftOp::Id() - ops.T * ops.T.adjoint();
  for (Index n = -8; n <= 8; ++n) EXPECT_EQ((defect * defect)(FinVec::basis(n)), defect(FinVec::basis(n)));
}

TEST(BlockUnitary, VerifyOnWindow) {
  const Report r = verify_block_unitary(64);
  EXPECT_TRUE(r.passed()) << describe_failures(r);
}

TEST(GammaSeminorm, Examples) {
  EXPECT_TRUE(gamma_seminorm_witness(ShiftOp::B(), 64).vanishing);
  const GammaWitness inv = gamma_seminorm_witness(ShiftOp::Binv(), 64);
  EXPECT_FALSE(inv.vanishing);
  EXPECT_EQ(inv.lower_bound_squared, Rational(1));
  ASSERT_TRUE(inv.lower_bound_exact().has_value());
  EXPECT_EQ(*inv.lower_bound_exact(), Rational(1));
  EXPECT_EQ(inv.witness_index, 0);
  EXPECT_EQ(inv.witness_image, FinVec::basis(-1));
  EXPECT_TRUE(gamma_seminorm_witness(ShiftOp::Id(), 64).vanishing);
  const GammaWitness half = gamma_seminorm_witness(parse_expression("1/2*B' + 1/2*I"), 8);
  EXPECT_EQ(half.lower_bound_squared, Rational(1, 4));
  EXPECT_EQ(gamma_seminorm_witness(parse_expression("B' + J"), 8).lower_bound_squared, Rational(1));
  const GammaWitness irr = gamma_seminorm_witness(parse_expression("B' + B'*B'"), 8);
  EXPECT_EQ(irr.lower_bound_squared, Rational(2));
  EXPECT_FALSE(irr.lower_bound_exact().has_value());
}

TEST(LsCommutator, Examples) {
  const ShiftOp comm = ShiftOp::P() * ShiftOp::B() - ShiftOp::B() * ShiftOp::P();
  EXPECT_EQ(comm(FinVec::basis(-1)), FinVec::basis(0));
  for (Index n = 0; n <= 64; ++n) EXPECT_TRUE(comm(FinVec::basis(n)).is_zero());
  const ShiftOp pp = ShiftOp::P() * ShiftOp::P() - ShiftOp::P() * ShiftOp::P();
  for (Index n = -64; n <= 64; ++n) EXPECT_TRUE(pp(FinVec::basis(n)).is_zero());
  for (const char* expr : {"B", "P", "J", "B'", "J*B*P + B*P*J", "2i*B - J*P"}) {
    const Report r = ls_commutator_identity(parse_expression(expr), 64);
    EXPECT_TRUE(r.passed()) << expr << describe_failures(r);
  }
}

TEST(Parser, Grammar) {
  EXPECT_EQ(parse_expression("B")(FinVec::basis(0)), FinVec::basis(1));
  EXPECT_EQ(parse_expression("B^")(FinVec::basis(0)), FinVec::basis(-1));
  EXPECT_EQ(parse_expression("B'^")(FinVec::basis(0)), FinVec::basis(1));
  EXPECT_EQ(parse_expression("-J")(FinVec::basis(2)), GaussRational(-1) * FinVec::basis(-2));
  EXPECT_EQ(parse_expression("2.5*I")(FinVec::basis(0)), GaussRational(Rational(5, 2)) * FinVec::basis(0));
  EXPECT_EQ(parse_expression("3i*P")(FinVec::basis(1)), GaussRational(0, 3) * FinVec::basis(1));
  for (Index n = -3; n <= 3; ++n)
    EXPECT_EQ(parse_expression("(J*B*P)^")(FinVec::basis(n)), parse_expression("P*B'*J")(FinVec::basis(n)));
  EXPECT_THROW(parse_expression("B +"), MalformedInput);
  EXPECT_THROW(parse_expression("Q"), MalformedInput);
  EXPECT_THROW(parse_expression("(B"), MalformedInput);
  EXPECT_THROW(parse_expression("1/0"), MalformedInput);
}

TEST(ReportJson, Shape) {
  const Report r = verify_example_61(4);
  const Json j = report_to_json(r);
  EXPECT_EQ(j.at("failures").get<std::size_t>(), 0u);
  EXPECT_TRUE(j.at("pass").get<bool>());
  const Json& e = j.at("entries").at(0);
  for (const char* key : {"check", "index", "expected", "got", "pass"}) EXPECT_TRUE(e.contains(key)) << key;
}
