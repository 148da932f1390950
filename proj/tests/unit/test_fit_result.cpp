#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sawlab/errors.hpp"
#include "sawlab/estimate.hpp"

using namespace sawlab;
using namespace sawlab::estimate;

TEST(FitResult, JsonRoundTrip) {
  FitResult r;
  r.model = "s11";
  r.add("f0", 3.5e9, 12.5);
  r.add("q_ext", std::numeric_limits<double>::infinity(), 0.0);
  r.add("kappa_int", 125000.00000000001, -3.0);
  r.residual_norm = 0.125;
  r.converged = true;
  r.n_iter = 17;
  r.flags = {"two_solution"};
  r.notes = {"note"};
  const auto text = r.to_json();
  EXPECT_NE(text.find("\"q_ext\": \"inf\""), std::string::npos);
  const auto back = FitResult::from_json(text);
  EXPECT_EQ(back.model, "s11");
  EXPECT_EQ(back.value("kappa_int"), 125000.00000000001);
  EXPECT_EQ(back.sigma("kappa_int"), 3.0);
  EXPECT_TRUE(std::isinf(back.value("q_ext")));
  EXPECT_TRUE(back.has_flag("two_solution"));
  EXPECT_EQ(back.n_iter, 17);
  EXPECT_EQ(back.to_json(), text);
}

TEST(FitResult, KeysInDocumentedOrder) {
  FitResult r;
  r.model = "lorentzian";
  r.add("center", 1.0, 0.1);
  const auto text = r.to_json(-1);
  const auto pos = [&](const char* k) { return text.find(k); };
  EXPECT_LT(pos("\"model\""), pos("\"params\""));
  EXPECT_LT(pos("\"params\""), pos("\"sigma\""));
  EXPECT_LT(pos("\"sigma\""), pos("\"residual_norm\""));
  EXPECT_LT(pos("\"residual_norm\""), pos("\"converged\""));
  EXPECT_LT(pos("\"converged\""), pos("\"n_iter\""));
}

TEST(FitResult, NonConvergedIsNotAuthoritative) {
  FitResult r;
  EXPECT_FALSE(r.authoritative());
  r.converged = true;
  EXPECT_TRUE(r.authoritative());
  EXPECT_THROW(r.value("missing"), std::out_of_range);
}

TEST(FitResult, MalformedJson) {
  EXPECT_THROW(FitResult::from_json("{"), FormatError);
  EXPECT_THROW(FitResult::from_json("{\"model\": 3}"), FormatError);
}
