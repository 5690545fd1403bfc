// Copyright 2026 The ecdgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "ecdgraph/optim.hpp"

namespace ecd {
namespace {

TEST(XavierUniform, BoundsAndCentering) {
  Rng rng(1);
  Matrix w = XavierUniform(300, 256, rng);
  const double bound = std::sqrt(6.0 / (300.0 + 256.0));
  EXPECT_EQ(w.rows(), 300);
  EXPECT_EQ(w.cols(), 256);
  EXPECT_LE(w.cwiseAbs().maxCoeff(), bound);
  EXPECT_GT(w.cwiseAbs().maxCoeff(), 0.99 * bound);
  EXPECT_NEAR(w.mean(), 0.0, 0.01 * bound);
  // Variance of U(-a, a) is a^2 / 3 = 2 / (fan_in + fan_out).
  const double var = (w.array() - w.mean()).square().mean();
  EXPECT_NEAR(var, 2.0 / 556.0, 0.02 * 2.0 / 556.0);
}

TEST(ClipGlobalNorm, ScalesOnlyAboveThreshold) {
  Var a(Matrix::Zero(1, 2), true), b(Matrix::Zero(2, 1), true);
  a.mutable_grad() << 3.0, 0.0;
  b.mutable_grad() << 0.0, 4.0;
  std::vector<Var> ps = {a, b};
  EXPECT_DOUBLE_EQ(ClipGlobalNorm(ps, 1.0), 5.0);
  EXPECT_NEAR(a.grad()(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(b.grad()(1, 0), 0.8, 1e-15);
  EXPECT_NEAR(ClipGlobalNorm(ps, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(a.grad()(0, 0), 0.6, 1e-15);
}

TEST(ClipGlobalNorm, MissingGradientsCountAsZero) {
  Var a(Matrix::Zero(1, 2), true), b(Matrix::Zero(2, 1), true);
  a.mutable_grad() << 0.5, 0.0;
  std::vector<Var> ps = {a, b};
  EXPECT_DOUBLE_EQ(ClipGlobalNorm(ps, 1.0), 0.5);
  EXPECT_FALSE(b.has_grad());
}

TEST(ClipGlobalNorm, NonFiniteIsATrainingError) {
  Var a(Matrix::Zero(1, 1), true);
  a.mutable_grad()(0, 0) = std::numeric_limits<double>::quiet_NaN();
  std::vector<Var> ps = {a};
  EXPECT_THROW(ClipGlobalNorm(ps, 1.0), TrainingError);
}

// Reference trace from an independent AMSGrad implementation (lr 0.1,
// betas 0.9/0.999, eps 1e-8, bias-corrected moments).
TEST(AmsGradStep, MatchesReferenceTrace) {
  Matrix x(1, 2);
  x << 1.0, -0.5;
  MomentState s = MomentState::Zeros(1, 2);
  const double grads[5][2] = {{2.0, -1.0}, {0.5, 3.0}, {-4.0, 0.1},
                              {1e-3, -2.0}, {0.0, 0.0}};
  const double expected[5][2] = {{0.9000000005, -0.400000001},
                                 {0.8169402477023616, -0.44941898410874415},
                                 {0.8443438331556997, -0.4896211009249024},
                                 {0.8667670398135996, -0.48637378165610484},
                                 {0.885710283809307, -0.4836304291029769}};
  AmsGradOptions o{0.1, 0.9, 0.999, 1e-8};
  for (int t = 0; t < 5; ++t) {
    Matrix g(1, 2);
    g << grads[t][0], grads[t][1];
    AmsGradStep(x, g, s, t + 1, o);
    EXPECT_NEAR(x(0, 0), expected[t][0], 1e-14) << "step " << t + 1;
    EXPECT_NEAR(x(0, 1), expected[t][1], 1e-14) << "step " << t + 1;
  }
}

TEST(AmsGradStep, FirstStepHasMagnitudeLr) {
  Matrix x = Matrix::Zero(1, 3);
  Matrix g(1, 3);
  g << 10.0, -0.01, 1e-4;
  MomentState s = MomentState::Zeros(1, 3);
  AmsGradStep(x, g, s, 1, {0.001, 0.9, 0.999, 1e-8});
  EXPECT_NEAR(x(0, 0), -0.001, 1e-9);
  EXPECT_NEAR(x(0, 1), 0.001, 1e-8);
  EXPECT_NEAR(x(0, 2), -0.001, 1e-7);
}

TEST(AmsGradStep, SecondMomentMaxNeverDecreases) {
  Rng rng(2);
  Matrix x = Matrix::Zero(2, 2);
  MomentState s = MomentState::Zeros(2, 2);
  Matrix prev = s.v_hat;
  for (int t = 1; t <= 200; ++t) {
    Matrix g(2, 2);
    for (Index i = 0; i < 4; ++i) g.data()[i] = rng.Uniform(-1, 1) * (t % 17 == 0 ? 50 : 1);
    AmsGradStep(x, g, s, t, {});
    EXPECT_TRUE((s.v_hat.array() >= prev.array()).all());
    EXPECT_TRUE((s.v_hat.array() >= s.v.array()).all());
    prev = s.v_hat;
  }
}

TEST(RiemannianAmsGrad, EuclideanKindIsPlainAmsGrad) {
  Rng rng(3);
  Matrix a(3, 2);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = rng.Uniform(-1, 1);
  Matrix b = a;
  MomentState sa = MomentState::Zeros(3, 2), sb = MomentState::Zeros(3, 2);
  for (int t = 1; t <= 20; ++t) {
    Matrix g(3, 2);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.Uniform(-1, 1);
    AmsGradStep(a, g, sa, t, {});
    RiemannianAmsGradStep(ManifoldKind::kEuclidean, b, g, sb, t, {});
    EXPECT_EQ(a, b);
  }
}

// Pushes points outward with large gradients and a large learning rate.
TEST(RiemannianAmsGrad, PointsStayOnTheirManifold) {
  for (ManifoldKind k : {ManifoldKind::kPoincare, ManifoldKind::kLorentz}) {
    Rng rng(4);
    const Index d = 4;
    Matrix pts(6, manifold::AmbientDim(k, d));
    for (Index i = 0; i < 6; ++i) {
      RowVector v = RowVector::Zero(pts.cols());
      for (Index j = pts.cols() - d; j < pts.cols(); ++j) v(j) = rng.Uniform(-0.5, 0.5);
      pts.row(i) = manifold::Exp0(k, v);
    }
    MomentState s = MomentState::Zeros(pts.rows(), pts.cols());
    for (int t = 1; t <= 1000; ++t) {
      Matrix g = -100.0 * pts;  // descent direction points away from origin
      if (k == ManifoldKind::kLorentz) g.col(0).setZero();
      RiemannianAmsGradStep(k, pts, g, s, t, {0.1, 0.9, 0.999, 1e-8});
      for (Index i = 0; i < pts.rows(); ++i) {
        RowVector p = pts.row(i);
        if (k == ManifoldKind::kPoincare) {
          ASSERT_LE(p.norm(), 1.0 - manifold::kBallEps);
        } else {
          ASSERT_LE(std::abs(manifold::MinkowskiDot(p, p) + 1.0), 1e-6);
        }
      }
    }
  }
}

// The first step covers lr of manifold distance at any depth; near the
// boundary that is a much shorter Euclidean move.
TEST(RiemannianAmsGrad, FirstStepCoversLrOfManifoldDistance) {
  const double lr = 1e-3;
  for (ManifoldKind k : {ManifoldKind::kPoincare, ManifoldKind::kLorentz}) {
    double euclid_near = 0.0, euclid_far = 0.0;
    for (double radius : {0.1, 4.0}) {
      RowVector v = RowVector::Zero(manifold::AmbientDim(k, 3));
      v(v.size() - 3) = radius;
      const RowVector x = manifold::Exp0(k, v);
      Matrix pts = x;
      Matrix g = Matrix::Zero(1, pts.cols());
      g(0, pts.cols() - 1) = 3.0;
      g(0, pts.cols() - 2) = -1.0;
      MomentState s = MomentState::Zeros(1, pts.cols());
      RiemannianAmsGradStep(k, pts, g, s, 1, {lr, 0.9, 0.999, 1e-8});
      EXPECT_NEAR(manifold::Dist(k, x, pts.row(0)), lr, 1e-2 * lr)
          << ToString(k) << " radius " << radius;
      (radius < 1.0 ? euclid_near : euclid_far) = (pts.row(0) - x).norm();
    }
    if (k == ManifoldKind::kPoincare) EXPECT_LT(euclid_far, 1e-2 * euclid_near);
  }
}

TEST(AmsGradOptimizer, MissingGradientStillAppliesMomentum) {
  Var w(Matrix::Zero(1, 1), true);
  AmsGrad opt({w}, {}, ManifoldKind::kEuclidean, {0.1});
  w.mutable_grad()(0, 0) = 1.0;
  opt.Step();
  const double after_first = w.value()(0, 0);
  EXPECT_LT(after_first, 0.0);
  w.ZeroGrad();
  opt.Step();
  EXPECT_LT(w.value()(0, 0), after_first);
  EXPECT_EQ(opt.step(), 2);
  EXPECT_EQ(opt.States().size(), 1u);
}

}  // namespace
}  // namespace ecd
