#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "oracle/dense_oracle.hpp"
#include "quenchotoc/evolution.hpp"

using namespace quenchotoc;

namespace {

oracle::Drive drive_of(const ChainParams& c, const QuenchProtocol& p) {
  oracle::Drive d;
  d.periodic = p.tag == ProtocolTag::Periodic;
  d.J = c.J;
  d.tau = c.tau;
  d.hx0 = p.hx0;
  d.hz0 = p.hz0;
  d.gamma = p.gamma;
  d.t_max = d.periodic ? p.t_max : 16 * kPi;
  return d;
}

DenseOperator random_matrix(Eigen::Index dim, std::mt19937_64& rng, bool hermitian) {
  std::normal_distribution<double> g;
  DenseOperator a(dim, dim);
  for (auto& x : a.reshaped()) x = Complex(g(rng), g(rng));
  if (hermitian) a = (a + a.adjoint()) / 2.0;
  return a;
}

DenseOperator fast_dense(const FloquetStep& step) {
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(step.n_sites()));
  DenseOperator u = DenseOperator::Identity(dim, dim);
  step.apply_left(u);
  return u;
}

const ChainParams kFig2{4, 1.0, kPi / 4};
const QuenchProtocol kLinearChaotic = QuenchProtocol::linear(1.0, 1.0, 0.1);

}  // namespace

TEST(BuildKick, DiagonalCaseHasDownSpinPhases) {
  const int n = 4;
  const ChainParams chain{n, 0.0, kPi / 6};
  const FloquetStep step = build_kick(chain, QuenchProtocol::linear(0.0, 1.0, 0.0), 1);
  const DenseOperator u = step.dense();
  for (Eigen::Index b = 0; b < u.rows(); ++b) {
    const int down = std::popcount(static_cast<unsigned>(b));
    const Complex expected = std::polar(1.0, -chain.tau * (n - 2 * down));
    EXPECT_LT(std::abs(u(b, b) - expected), 1e-14);
    EXPECT_LT((u.col(b).norm() - 1.0), 1e-14);
  }
  EXPECT_LT(max_norm(fast_dense(step) - u), 1e-14);
}

TEST(BuildKick, TwoSiteKickMatchesSpectralExponential) {
  const ChainParams chain{2, 1.0, kPi / 6};
  const auto p = QuenchProtocol::linear(1.0, 1.0, 0.1);
  const double tau = chain.tau;
  const oracle::Mat hxx = oracle::bonds_xx(2), hx = oracle::sum_sigma('x', 2, 1, 2),
                    hz = oracle::sum_sigma('z', 2, 1, 2);
  const oracle::Mat expected =
      oracle::expm_herm(hxx + hx, tau) * oracle::expm_herm(hz, tau * (1.0 + 0.1 * tau));
  const FloquetStep step = build_kick(chain, p, 1);
  EXPECT_LT(max_norm(step.dense() - expected), 1e-10);
  EXPECT_LT(max_norm(fast_dense(step) - expected), 1e-10);
}

TEST(BuildKick, LayeredAndFastRoutesAgreeWithOracleOverRandomKicks) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int n = 1; n <= 5; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      const ChainParams chain{n, 2 * u01(rng) - 1, 0.05 + u01(rng)};
      const QuenchProtocol p = trial % 2 ? QuenchProtocol::periodic(2 * u01(rng), 4 * u01(rng),
                                                                   8 * kPi)
                                         : QuenchProtocol::linear(u01(rng), u01(rng), u01(rng));
      const long k = 1 + trial * 7;
      const FloquetStep step = build_kick(chain, p, k);
      const oracle::Mat expected = oracle::kick(n, drive_of(chain, p), k);
      EXPECT_LT(max_norm(step.dense() - expected), 1e-9) << "N=" << n << " trial " << trial;
      EXPECT_LT(max_norm(fast_dense(step) - expected), 1e-9) << "N=" << n << " trial " << trial;
      EXPECT_LT(unitarity_defect(step.dense()), 1e-10);
    }
  }
}

TEST(BuildKick, FrameApplicationIsConjugatedKick) {
  const int n = 5;
  const ChainParams chain{n, 0.8, 0.37};
  const FloquetStep step = build_kick(chain, QuenchProtocol::linear(0.4, 1.1, 0.2), 3);
  const DenseOperator u = step.dense();
  for (std::size_t frame : {std::size_t{0b00111}, std::size_t{0b11000}, std::size_t{0b10101}}) {
    DenseOperator g = DenseOperator::Identity(32, 32);
    for (Eigen::Index c = 0; c < 32; ++c) walsh_hadamard(g.col(c).data(), 32, frame);
    g /= std::sqrt(static_cast<double>(1 << std::popcount(frame)));
    DenseOperator framed = DenseOperator::Identity(32, 32);
    step.apply_left(framed, frame);
    EXPECT_LT(max_norm(framed - g * u * g), 1e-12) << frame;
  }
}

TEST(BuildKick, ApplyRightDaggerMatchesDenseProduct) {
  std::mt19937_64 rng(12);
  const FloquetStep step = build_kick(kFig2, kLinearChaotic, 2);
  const DenseOperator a = random_matrix(16, rng, false);
  DenseOperator b = a;
  step.apply_right_dagger(b);
  EXPECT_LT(max_norm(b - a * step.dense().adjoint()), 1e-12);
}

TEST(BuildKick, RejectsKickZeroAndWrongDimension) {
  EXPECT_THROW(build_kick(kFig2, kLinearChaotic, 0), ParameterError);
  DenseOperator w = DenseOperator::Identity(8, 8);
  EXPECT_THROW(build_kick(kFig2, kLinearChaotic, 1).apply_left(w), ParameterError);
}

TEST(CumulativeUnitary, FirstKickEqualsSingleFactor) {
  EXPECT_LT(max_norm(cumulative_unitary(kFig2, kLinearChaotic, 1) -
                     build_kick(kFig2, kLinearChaotic, 1).dense()),
            1e-13);
}

TEST(CumulativeUnitary, ConstantProtocolIsAPower) {
  const auto p = QuenchProtocol::constant(0.8, 1.0);
  const oracle::Mat u1 = oracle::kick(4, drive_of(kFig2, p), 1);
  oracle::Mat power = oracle::Mat::Identity(16, 16);
  for (long n = 1; n <= 20; ++n) {
    power = u1 * power;
    EXPECT_LT(max_norm(cumulative_unitary(kFig2, p, n) - power), 1e-9) << n;
  }
}

TEST(CumulativeUnitary, CommutesWithReflection) {
  const DenseOperator r = reflection_operator(4);
  for (const auto& p : {kLinearChaotic, QuenchProtocol::periodic(4.0, 4.0)}) {
    const DenseOperator u = cumulative_unitary(kFig2, p, 5);
    EXPECT_LT(max_norm(u * r - r * u), 1e-10);
    EXPECT_LT(unitarity_defect(u), 1e-12);
  }
}

TEST(CumulativeUnitary, MatchesTimeOrderedOracle) {
  for (const auto& p : {kLinearChaotic, QuenchProtocol::periodic(1.0, 4.0, 8 * kPi)}) {
    EXPECT_LT(max_norm(cumulative_unitary(kFig2, p, 12) - oracle::cumulative(4, drive_of(kFig2, p),
                                                                            12)),
              1e-10);
  }
}

TEST(Advance, ZeroKicksLeaveObservableUnchanged) {
  const DenseOperator w = oracle::sum_sigma('x', 4, 1, 2, 0.5);
  const EvolutionState s = start_evolution(kFig2, kLinearChaotic, w);
  EXPECT_EQ(s.n, 0);
  EXPECT_EQ(lab_operator(s), w);
}

TEST(Advance, FirstKickMatchesDenseConjugation) {
  const oracle::Mat w = oracle::sum_sigma('x', 4, 1, 2, 0.5);
  for (const auto& p : {QuenchProtocol::linear(0.0, 1.0, 0.1), kLinearChaotic}) {
    EvolutionState s = start_evolution(kFig2, p, w);
    advance(s);
    const oracle::Mat u = oracle::kick(4, drive_of(kFig2, p), 1);
    EXPECT_LT(max_norm(s.evolved - u * w * u.adjoint()), 1e-10);
  }
}

TEST(Advance, SpectrumAndHermiticityArePreserved) {
  const DenseOperator w = oracle::sum_sigma('x', 4, 1, 2, 0.5) + oracle::sigma('z', 3, 4);
  EvolutionState s = start_evolution(kFig2, kLinearChaotic, w);
  for (int k = 0; k < 10; ++k) advance(s);
  EXPECT_LT(hermiticity_defect(s.evolved), 1e-10);
  Eigen::SelfAdjointEigenSolver<DenseOperator> before(w), after(s.evolved);
  EXPECT_LT((before.eigenvalues() - after.eigenvalues()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Advance, NonHermitianOperatorsUseFullConjugation) {
  std::mt19937_64 rng(13);
  const DenseOperator a = random_matrix(16, rng, false);
  EvolutionState s = start_evolution(kFig2, kLinearChaotic, a);
  EXPECT_FALSE(s.hermitian);
  for (int k = 0; k < 3; ++k) advance(s);
  const oracle::Mat u = oracle::cumulative(4, drive_of(kFig2, kLinearChaotic), 3);
  EXPECT_LT(max_norm(s.evolved - u * a * u.adjoint()), 1e-10);
}

TEST(Advance, HadamardFrameEvolutionMatchesLabFrame) {
  const ChainParams chain{6, 1.0, kPi / 6};
  const auto p = QuenchProtocol::periodic(1.0, 4.0, 8 * kPi);
  const DenseOperator w = oracle::sum_sigma('x', 6, 1, 3, 1.0 / 3);
  const std::size_t v_sites = site_mask(4, 6) | site_mask(5, 6) | site_mask(6, 6);
  EvolutionState lab = start_evolution(chain, p, w, true);
  EvolutionState framed = start_evolution(chain, p, w, false, v_sites);
  for (int k = 0; k < 7; ++k) {
    advance(lab);
    advance(framed);
  }
  EXPECT_LT(max_norm(lab_operator(framed) - lab.evolved), 1e-12);
  const DenseOperator& u = *lab.cumulative;
  EXPECT_LT(max_norm(lab.evolved - u * w * u.adjoint()), 1e-12);
}

TEST(Advance, NormDriftIsDetected) {
  EvolutionState s = start_evolution(kFig2, kLinearChaotic, oracle::sigma('x', 1, 4));
  check_norm_drift(s);
  s.evolved *= 1.0 + 1e-6;
  EXPECT_THROW(check_norm_drift(s), NumericalError);
}

TEST(Advance, UnitarityAndSymmetryHoldOverManyKicks) {
  const ChainParams chain{6, 1.0, kPi / 4};
  for (const auto& p : {kLinearChaotic, QuenchProtocol::periodic(1.0, 4.0)}) {
    EvolutionState s = start_evolution(chain, p, oracle::sigma('x', 1, 6), true);
    for (int k = 0; k < 200; ++k) advance(s);
    EXPECT_LT(unitarity_defect(*s.cumulative), 1e-10);
    EXPECT_LT(reflection_commutator_norm(*s.cumulative, 6), 1e-10);
  }
}
