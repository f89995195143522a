#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "frozen_values.hpp"
#include "lap/analysis.hpp"

using namespace lap;

namespace {

Problem example_problem(int Nt, int Nx) {
    Domain d;
    return Problem(d, Grid(d, Nt, Nx), example_potential(d));
}

}  // namespace

TEST(EnergyTrace, PotentialEnergyOfInterpolantOnFirstLayer) {
    for (int N : {8, 16, 64}) {
        Problem pb = example_problem(N, N);
        ScalarField u = linear_interpolant(0, pb.dom, pb.grid, pb.beta);
        EnergyTrace tr = energy_trace(pb, u, 0.0);
        ASSERT_EQ(tr.size(), static_cast<size_t>(N));
        EXPECT_NEAR(tr.E_pot.front(), 1 - 1.0 / N, 1e-13);
        EXPECT_NEAR(tr.E_pot.back(), -(1 - 1.0 / N), 1e-13);
        EXPECT_NEAR(tr.x1.front(), 0.5 / N, 1e-15);
    }
}

TEST(EnergyTrace, DissipationTermJumpAcrossInterpolant) {
    double prev = kInfinity;
    for (int N : {64, 256}) {
        Problem pb = example_problem(N, N);
        ScalarField u = linear_interpolant(0, pb.dom, pb.grid, pb.beta);
        EnergyTrace tr = energy_trace(pb, u, 0.0);
        double jump = tr.E_f.back() - tr.E_f.front();
        double err = std::abs(jump - oracle::kEfJumpExact * (1 - 1.0 / N));
        EXPECT_LT(err, 2e-3);
        EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(EnergyTrace, LimitHamiltonianIsKineticPlusPotential) {
    Problem pb = example_problem(8, 8);
    ScalarField u = linear_interpolant(0, pb.dom, pb.grid, pb.beta);
    EnergyTrace tr = energy_trace(pb, u, 0.0);
    for (size_t i = 0; i < tr.size(); ++i) {
        double v = quadrature(u, [&](const CellSample& s) {
            return s.i == static_cast<int>(i) ? pb.pot.V(s.x2, s.u) : 0.0;
        }) / pb.grid.ht;
        EXPECT_NEAR(tr.H[i], tr.E_kin[i] + v, 1e-12);
    }
}

TEST(EnergyTrace, CsvRoundTripIsExact) {
    Problem pb = example_problem(6, 6);
    ScalarField u = initial_guess(0.2, pb.dom, pb.grid, pb.beta);
    EnergyTrace tr = energy_trace(pb, u, 0.2);
    std::stringstream ss;
    write_energy_csv(ss, tr);
    EnergyTrace back = read_energy_csv(ss);
    EXPECT_EQ(back.E_kin, tr.E_kin);
    EXPECT_EQ(back.H, tr.H);
    EXPECT_EQ(back.D, tr.D);
    std::stringstream bad("row,x1\n");
    EXPECT_THROW(read_energy_csv(bad), PreconditionError);
}

TEST(FirstIntegral, ConstantTraceHasZeroDeviation) {
    EnergyTrace tr;
    for (int i = 0; i < 5; ++i) {
        tr.x1.push_back(i);
        tr.H.push_back(i == 0 || i == 4 ? 100.0 : 2.5);
        tr.E_kin.push_back(0);
        tr.E_pot.push_back(0);
        tr.E_f.push_back(0);
        tr.D.push_back(0);
    }
    EXPECT_EQ(first_integral_deviation(tr), 0.0);
    tr.H[2] = 3.5;
    EXPECT_NEAR(first_integral_deviation(tr), 2.0 / 3, 1e-15);
}

TEST(Dissipation, RatesAndMismatch) {
    EnergyTrace tr;
    for (int i = 0; i < 4; ++i) {
        tr.x1.push_back(0.5 * i);
        tr.E_kin.push_back(-1.0 * i);
        tr.E_pot.push_back(0);
        tr.E_f.push_back(0);
        tr.H.push_back(0);
        tr.D.push_back(-2.0);
    }
    DissipationReport r = dissipation_check(tr);
    ASSERT_EQ(r.rate.size(), 3u);
    for (double v : r.rate) EXPECT_DOUBLE_EQ(v, -2.0);
    EXPECT_DOUBLE_EQ(r.max_rate, 0.0);
    EXPECT_DOUBLE_EQ(r.max_abs_rate, 2.0);
    EXPECT_DOUBLE_EQ(r.max_mismatch, 0.0);
    EXPECT_DOUBLE_EQ(r.row_scale, 5.0);
}

TEST(MixingZone, InterpolantIsOneComponent) {
    Domain d;
    Grid g(d, 16, 16);
    MixingZone mz = mixing_zone(linear_interpolant(0, d, g, 1.25), 1e-4);
    EXPECT_EQ(mz.count(), static_cast<size_t>(16 * 16));
    ASSERT_EQ(mz.components.size(), 1u);
    EXPECT_EQ(mz.holes[0], 0);
}

TEST(MixingZone, RestingFieldIsEmpty) {
    Domain d;
    Grid g(d, 8, 8);
    ScalarField u(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Nx; ++j) u(i, j) = boundary_profile(g.x2(j), 0, 1.25, d);
    MixingZone mz = mixing_zone(u, 1e-4);
    EXPECT_EQ(mz.count(), 0u);
    EXPECT_TRUE(mz.components.empty());
    EXPECT_THROW(mixing_zone(u, 0.0), DomainError);
}

TEST(MixingZone, DetectsHole) {
    Domain d;
    Grid g(d, 16, 16);
    ScalarField u(g);
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j <= g.Nx; ++j) {
            bool frozen = i >= 6 && i <= 9 && j >= 6 && j <= 9;
            u(i + 1, j) = u(i, j) + (frozen ? 0.0 : 0.1 * g.ht);
        }
    MixingZone mz = mixing_zone(u, 1e-4);
    ASSERT_EQ(mz.components.size(), 1u);
    EXPECT_EQ(mz.holes[0], 1);
    EXPECT_FALSE(mz.at(7, 7));
    EXPECT_TRUE(mz.at(7, 5));
}

TEST(MixingZone, DefaultThreshold) { EXPECT_NEAR(default_mixing_threshold(1e-8), 1e-3, 1e-18); }

TEST(Traces, InterpolantSatisfiesBoundAndMonotonicity) {
    Domain d;
    Grid g(d, 32, 32);
    TraceTable t = trace_attainment(linear_interpolant(0, d, g, 1.25));
    EXPECT_TRUE(t.B1_bound);
    EXPECT_TRUE(t.A1_monotone);
    EXPECT_TRUE(t.C1_monotone);
    ASSERT_FALSE(t.a.empty());
    EXPECT_DOUBLE_EQ(t.a.front(), 0.5);
    EXPECT_NEAR(t.a.back(), g.ht, 1e-15);
    for (size_t k = 0; k < t.b.size(); ++k) EXPECT_NEAR(t.B1[k], t.b[k], 1e-12);
    for (double c : t.C1) EXPECT_NEAR(c, 2.0, 1e-12);
}

TEST(Traces, FlagsLargeBoundaryFlux) {
    Domain d;
    Grid g(d, 16, 16);
    ScalarField u(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Nx; ++j) u(i, j) = 5 * g.x1(i);
    EXPECT_FALSE(trace_attainment(u).B1_bound);
}

TEST(Oscillation, RowsNotesAndSkippedBalls) {
    Domain d;
    Grid g(d, 32, 32);
    ScalarField u = linear_interpolant(0, d, g, 1.25);
    OscillationTable t = oscillation_modulus(u, {{0.5, 0.0}, {0.05, 0.0}}, {0.1, 0.2});
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.notes.size(), 2u);
    for (const auto& row : t.rows) {
        EXPECT_GT(row.osc, 0);
        EXPECT_LE(row.osc, 2 * row.r * std::sqrt(5.0) + 1e-12);
    }
    EXPECT_GT(t.grad_l2, 0);

    ScalarField w = u;
    for (int j = 0; j <= g.Nx; ++j) w(3, j) += 0.5;
    OscillationTable tw = oscillation_modulus(w, {}, {});
    EXPECT_FALSE(tw.notes.empty());
}

TEST(KineticJump, NeedsUnitTimeRun) {
    EXPECT_THROW(kinetic_jump_vs_T({{2, 1, 0.1, 0.1}}), PreconditionError);
    auto rows = kinetic_jump_vs_T({{1, 2.0, 1.5, 1.5}, {2, 2.1, 0.9, 0.905}, {4, 2.2, 0.6, 0.4}});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_DOUBLE_EQ(rows[1].bound, 1.0);
    EXPECT_TRUE(rows[1].bound_ok);
    EXPECT_TRUE(rows[1].ends_agree);
    EXPECT_DOUBLE_EQ(rows[2].bound, 0.5);
    EXPECT_FALSE(rows[2].bound_ok);
    EXPECT_FALSE(rows[2].ends_agree);
}
