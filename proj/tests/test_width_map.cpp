#include <gtest/gtest.h>

#include <tridentlab/width_map.hpp>

using namespace tridentlab;

namespace {

std::vector<ContinuationStage> trace_of(std::vector<double> indicator, bool all_converged = true)
{
    std::vector<ContinuationStage> t;
    for (std::size_t k = 0; k < indicator.size(); ++k) {
        ContinuationStage s;
        s.cap = 4.0 * static_cast<double>(k + 1);
        s.indicator = indicator[k];
        s.converged = all_converged || k + 1 < indicator.size();
        t.push_back(s);
    }
    return t;
}

} // namespace

TEST(Growth, SyntheticTraces)
{
    EXPECT_EQ(read_growth(trace_of({1.0, 1.5, 1.6})).growth, Growth::saturating);
    EXPECT_EQ(read_growth(trace_of({1.0, 1.001, 1.0015})).growth, Growth::saturating);
    // slope of a half per unit cap persists
    EXPECT_EQ(read_growth(trace_of({1.0, 3.0, 5.0, 7.0})).growth, Growth::degenerating);
    EXPECT_EQ(read_growth(trace_of({1.0, 5.0, 9.0})).growth, Growth::degenerating);
    // slowing, but not by half, and still large
    EXPECT_EQ(read_growth(trace_of({0.0, 2.0, 3.4})).growth, Growth::undecided);
    // small but not shrinking
    EXPECT_EQ(read_growth(trace_of({0.0, 0.5, 1.0})).growth, Growth::undecided);
    // any failed stage
    EXPECT_EQ(read_growth(trace_of({1.0, 1.5, 1.6}, false)).growth, Growth::degenerating);
    EXPECT_THROW(read_growth(trace_of({1.0, 2.0})), InvalidInput);
}

TEST(Growth, ReadingCarriesIncrements)
{
    const GrowthReading r = read_growth(trace_of({1.0, 2.0, 2.25}));
    EXPECT_DOUBLE_EQ(r.previous, 1.0);
    EXPECT_DOUBLE_EQ(r.last, 0.25);
    EXPECT_DOUBLE_EQ(r.step, 4.0);
}

TEST(Combine, Table)
{
    using A = AreaVerdict;
    EXPECT_EQ(combine(A::below_wall, Growth::saturating), ProbeClass::below);
    EXPECT_EQ(combine(A::at_wall_within_tol, Growth::saturating), ProbeClass::below);
    EXPECT_EQ(combine(A::at_wall_within_tol, Growth::degenerating), ProbeClass::at_wall);
    EXPECT_EQ(combine(A::below_wall, Growth::degenerating), ProbeClass::conflict);
    EXPECT_EQ(combine(A::below_wall, Growth::undecided), ProbeClass::conflict);
    EXPECT_EQ(combine(A::at_wall_within_tol, Growth::undecided), ProbeClass::conflict);
}

TEST(Resolution, AutomaticChoice)
{
    const Resolution r;
    EXPECT_EQ(r.nx_for(0.25), 64);
    EXPECT_EQ(r.nx_for(1.0), 64);
    EXPECT_EQ(r.nx_for(4.0), 128);
    EXPECT_EQ(r.ny_for(1.0, 2.0), 65);   // clamped up
    EXPECT_EQ(r.ny_for(0.1, 2.0) % 2, 1);
    EXPECT_EQ(r.ny_for(0.1, 2.0), 257);  // clamped down
    const Resolution f = r.refined(1.0, 2.0);
    EXPECT_EQ(f.nx_for(1.0), 128);
    EXPECT_EQ(f.ny_for(1.0, 2.0), 129);
    Resolution fixed{32, 17};
    EXPECT_EQ(fixed.grid_for(3.0, 1.0).nx(), 32);
    EXPECT_EQ(fixed.grid_for(3.0, 1.0).ny(), 17);
}

TEST(Slack, ScalesWithMeshAndCap)
{
    Grid g({1.0, 2.0}, 64, 65);
    Grid f({1.0, 2.0}, 128, 129);
    const double s = area_slack(g, 100.0, 1e3), sf = area_slack(f, 100.0, 1e3);
    EXPECT_NEAR(s / sf, 4.0, 1e-12);
    EXPECT_NEAR(area_slack(g, 0.0, 2.0), std::exp(-2.0), 1e-15);
}

TEST(Alpha, NarrowStripIsBelowTheWall)
{
    const AlphaEstimate e = estimate_alpha(1.0, 0.5);
    EXPECT_EQ(e.verdict, AreaVerdict::below_wall);
    EXPECT_EQ(e.failed_stage, -1);
    EXPECT_LT(e.area.total, 2.7);
    EXPECT_TRUE(e.monotone);
    EXPECT_DOUBLE_EQ(e.wall, 3.0);
}

TEST(Alpha, AreaNeverExceedsTheWallBeyondSlack)
{
    // the wall surface (translating plane pieces) is always admissible
    for (double b : {1.0, 2.0, 3.0}) {
        const AlphaEstimate e = estimate_alpha(1.0, b);
        EXPECT_LE(e.area.total, e.wall + e.slack) << b;
    }
}

TEST(Alpha, RejectsBadInput)
{
    EXPECT_THROW(estimate_alpha(0.0, 1.0), InvalidInput);
    EXPECT_THROW(estimate_alpha(1.0, -1.0), InvalidInput);
    EXPECT_THROW(estimate_alpha(1.0, 4.0), InvalidInput);
}

TEST(Width, BracketAtUnitHalfPeriod)
{
    const WidthEstimate w = estimate_width(1.0);
    ASSERT_TRUE(w.ok) << w.failure;
    EXPECT_LE(w.width(), 0.05 + 1e-12);
    EXPECT_GT(w.b_lo, 0.5 * pi);
    EXPECT_LT(w.b_hi, pi);
    ASSERT_NE(w.probe_at(w.b_lo), nullptr);
    ASSERT_NE(w.probe_at(w.b_hi), nullptr);
    EXPECT_EQ(w.probe_at(w.b_lo)->verdict, ProbeClass::below);
    EXPECT_EQ(w.probe_at(w.b_hi)->verdict, ProbeClass::at_wall);

    // the endpoint classifications survive a doubled resolution
    WidthOptions fine;
    fine.resolution = Resolution{}.refined(1.0, w.b_hi);
    fine.escalation_extra_caps = -1;
    EXPECT_EQ(classify_width(1.0, w.b_lo, fine).verdict, ProbeClass::below);
    EXPECT_EQ(classify_width(1.0, w.b_hi, fine).verdict, ProbeClass::at_wall);
}

TEST(Width, RejectsBadOptions)
{
    WidthOptions o;
    o.eps0 = 1.0;
    EXPECT_THROW(estimate_width(1.0, o), InvalidInput);
    o = {};
    o.target_width = 0.0;
    EXPECT_THROW(estimate_width(1.0, o), InvalidInput);
    EXPECT_THROW(estimate_width(-1.0), InvalidInput);
}

TEST(WidthCurve, InputValidation)
{
    EXPECT_THROW(width_curve({}), InvalidInput);
    EXPECT_THROW(width_curve({1.0, 0.5}), InvalidInput);
    EXPECT_THROW(width_curve({1.0, 1.0}), InvalidInput);
}

TEST(WidthCurve, OrderingAllowsOverlap)
{
    WidthEstimate x, y;
    x.b_lo = 1.70;
    x.b_hi = 1.75;
    y.b_lo = 1.68;
    y.b_hi = 1.73;
    EXPECT_TRUE(midpoints_ordered(x, y));
    y.b_lo = 1.60;
    y.b_hi = 1.65;
    EXPECT_FALSE(midpoints_ordered(x, y));
}
