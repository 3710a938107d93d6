#include <cmath>
#include <limits>

#include <doctest.h>

#include "colorwai/error.hpp"
#include "colorwai/numerics.hpp"
#include "colorwai/rng.hpp"
#include "colorwai/ssim.hpp"
#include "oracles.hpp"

using namespace colorwai;
using namespace colorwai::numerics;

namespace {

LabeledLatentSet random_set(std::size_t n, std::size_t d, std::uint64_t seed,
                            const std::function<bool(const Vector&)>& label) {
  Rng rng(seed);
  LabeledLatentSet s;
  s.codes.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  s.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) s.codes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rng.normal();
    s.labels[i] = label(s.codes.row(static_cast<Eigen::Index>(i)).transpose()) ? 1 : 0;
  }
  return s;
}

LinearClassifier model(Vector w, double b) {
  LinearClassifier clf;
  clf.weights = std::move(w);
  clf.bias = b;
  return clf;
}

ImageBuffer pattern(int w, int h, double lo, double hi) {
  ImageBuffer img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = ((x / 3 + y / 5) % 2) ? hi : lo;
      img.set_pixel(y, x, {v, 0.5 * v + 0.2, 1.0 - 0.5 * v});
    }
  return img;
}

}  // namespace

TEST_SUITE("numerics") {
  TEST_CASE("classifier recovers a separating axis") {
    auto data = random_set(400, 2, 1, [](const Vector& x) { return x[0] > 0; });
    const auto clf = train_linear_classifier(data, LossKind::logistic, std::numeric_limits<double>::infinity(), 0);
    const double cos = clf.weights[0] / clf.weights.norm();
    CHECK(cos >= 0.999);
    CHECK(std::abs(clf.bias) / clf.weights.norm() < 0.05);
    const auto hinge = train_linear_classifier(data, LossKind::hinge, 0.1, 0);
    CHECK(hinge.weights[0] / hinge.weights.norm() >= 0.99);
  }

  TEST_CASE("classifier on pure noise is at chance") {
    Rng coin(77);
    auto train = random_set(400, 5, 2, [&](const Vector&) { return coin.uniform() < 0.5; });
    auto test = random_set(2000, 5, 3, [&](const Vector&) { return coin.uniform() < 0.5; });
    const auto clf = train_linear_classifier(train, LossKind::logistic, 0.1, 0);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
      hit += (decision_value(clf, test.codes.row(static_cast<Eigen::Index>(i)).transpose()) > 0) == (test.labels[i] == 1);
    CHECK(std::abs(static_cast<double>(hit) / test.size() - 0.5) <= 0.1);
  }

  TEST_CASE("classifier is deterministic and duplication invariant") {
    auto data = random_set(300, 4, 4, [](const Vector& x) { return x[1] + 0.3 * x[2] > 0.4; });
    const auto a = train_linear_classifier(data, LossKind::logistic, 0.1, 9);
    const auto b = train_linear_classifier(data, LossKind::logistic, 0.1, 9);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);

    // Balanced set so subsampling keeps every row, then each row twice.
    Rng noise(55);
    auto bal = random_set(200, 3, 5, [&](const Vector& x) { return x[0] + noise.normal() > 0; });
    std::size_t pos = bal.positives();
    LabeledLatentSet even;
    even.codes.resize(static_cast<Eigen::Index>(2 * std::min(pos, bal.size() - pos)), 3);
    std::size_t np = 0, nn = 0, k = 0;
    const std::size_t half = std::min(pos, bal.size() - pos);
    for (std::size_t i = 0; i < bal.size(); ++i) {
      const bool p = bal.labels[i] == 1;
      if ((p && np == half) || (!p && nn == half)) continue;
      (p ? np : nn)++;
      even.codes.row(static_cast<Eigen::Index>(k++)) = bal.codes.row(static_cast<Eigen::Index>(i));
      even.labels.push_back(p ? 1 : 0);
    }
    LabeledLatentSet twice;
    twice.codes.resize(even.codes.rows() * 2, 3);
    twice.codes << even.codes, even.codes;
    twice.labels = even.labels;
    twice.labels.insert(twice.labels.end(), even.labels.begin(), even.labels.end());
    // The mean loss is duplication invariant; the penalty scales with 1/N, so
    // compare without it.
    const double inf = std::numeric_limits<double>::infinity();
    const auto c1 = train_linear_classifier(even, LossKind::logistic, inf, 0);
    const auto c2 = train_linear_classifier(twice, LossKind::logistic, inf, 0);
    CHECK((c1.weights - c2.weights).norm() < 1e-4 * c1.weights.norm());
  }

  TEST_CASE("classifier input errors") {
    auto one = random_set(50, 2, 6, [](const Vector&) { return true; });
    CHECK_THROWS_WITH_AS(train_linear_classifier(one, LossKind::logistic, 0.1, 0), "degenerate labels", ValidationError);
    auto bad = random_set(50, 2, 6, [](const Vector& x) { return x[0] > 0; });
    bad.codes(3, 1) = std::nan("");
    CHECK_THROWS_AS(train_linear_classifier(bad, LossKind::logistic, 0.1, 0), ValidationError);
  }

  TEST_CASE("decision value") {
    Vector w(2);
    w << 2, 1;
    const auto clf = model(w, 0.0);
    Vector x(2);
    x << 1, 1;
    CHECK(decision_value(clf, x) == 3.0);
    const auto shifted = model(w, 1.5);
    const Vector boundary = -shifted.bias * w / w.squaredNorm();
    CHECK(std::abs(decision_value(shifted, boundary)) < 1e-12);
    CHECK_THROWS_AS(decision_value(clf, Vector::Zero(3)), ValidationError);
    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
      Vector wr(6), xr(6);
      for (int k = 0; k < 6; ++k) wr[k] = rng.normal(), xr[k] = rng.normal();
      const double b = rng.normal();
      double dot = b;
      for (int k = 0; k < 6; ++k) dot += wr[k] * xr[k];
      CHECK(decision_value(model(wr, b), xr) == doctest::Approx(dot).epsilon(1e-12));
    }
  }

  TEST_CASE("linear shapley fixtures") {
    Vector w(2), x(2);
    w << 2, 1;
    x << 1, 1;
    const auto att = shapley_linear(model(w, 0.3), x, Vector::Zero(2));
    CHECK(att.phi[0] == doctest::Approx(2.0));
    CHECK(att.phi[1] == doctest::Approx(1.0));
    CHECK(shapley_linear(model(w, 0.3), x, x).phi.isZero());
    CHECK_THROWS_AS(shapley_linear(model(w, 0), Vector::Zero(3), x), ValidationError);
  }

  TEST_CASE("exact shapley axioms and hand enumeration") {
    const Vector ones = Vector::Ones(2), zero2 = Vector::Zero(2);
    const auto sym = shapley_exact([](const Vector& z) { return z[0] + z[1]; }, ones, zero2);
    CHECK(sym[0] == doctest::Approx(1.0));
    CHECK(sym[1] == doctest::Approx(1.0));
    const auto dummy = shapley_exact([](const Vector& z) { return 3 * z[0]; }, ones, zero2);
    CHECK(dummy[1] == 0.0);
    const auto nl = shapley_exact([](const Vector& z) { return z[0] * z[1] + z[2]; }, Vector::Ones(3), Vector::Zero(3));
    CHECK(nl[0] == doctest::Approx(0.5));
    CHECK(nl[1] == doctest::Approx(0.5));
    CHECK(nl[2] == doctest::Approx(1.0));
    CHECK_THROWS_WITH_AS(shapley_exact([](const Vector&) { return 0.0; }, Vector::Zero(13), Vector::Zero(13)),
                         "enumeration too large", ValidationError);
  }

  TEST_CASE("exact shapley matches the permutation definition") {
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
      Vector x(5), bg(5);
      for (int k = 0; k < 5; ++k) x[k] = rng.normal(), bg[k] = rng.normal();
      auto f = [](const Vector& z) { return std::sin(z[0]) * z[1] + z[2] * z[3] * z[4] + z[4]; };
      const auto got = shapley_exact(f, x, bg);
      const auto want = oracle::shapley_by_permutations(
          [&](const std::vector<double>& z) { return f(Eigen::Map<const Vector>(z.data(), 5)); },
          std::vector<double>(x.data(), x.data() + 5), std::vector<double>(bg.data(), bg.data() + 5));
      for (int k = 0; k < 5; ++k) CHECK(got[k] == doctest::Approx(want[static_cast<std::size_t>(k)]).epsilon(1e-12));
    }
  }

  TEST_CASE("linear and exact shapley agree, efficiency holds") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      Vector w(8), x(8), bg(8);
      for (int k = 0; k < 8; ++k) w[k] = rng.normal(), x[k] = rng.normal(), bg[k] = rng.normal();
      const auto clf = model(w, rng.normal());
      const auto lin = shapley_linear(clf, x, bg).phi;
      const auto ex = shapley_exact([&](const Vector& z) { return decision_value(clf, z); }, x, bg);
      CHECK((lin - ex).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK(std::abs(lin.sum() - (decision_value(clf, x) - decision_value(clf, bg))) <= 1e-9);
    }
  }

  TEST_CASE("mean absolute importance") {
    auto one_d = random_set(100, 1, 2, [](const Vector& x) { return x[0] > 0; });
    Vector w1(1);
    w1 << 1.5;
    const auto imp1 = mean_abs_importance(model(w1, 0), one_d);
    CHECK(imp1[0] == doctest::Approx(1.0));

    auto two = random_set(20000, 2, 3, [](const Vector& x) { return x[0] + x[1] > 0; });
    const auto imp2 = mean_abs_importance(model(Vector::Ones(2), 0), two);
    CHECK(std::abs(imp2[0] - 0.5) <= 0.05);

    auto planted = random_set(600, 6, 4, [](const Vector& x) { return x[3] > 0.2; });
    const auto clf = train_linear_classifier(planted, LossKind::logistic, 0.1, 0);
    AttributionAudit audit;
    const auto imp = mean_abs_importance(clf, planted, &audit);
    Eigen::Index arg = 0;
    imp.maxCoeff(&arg);
    CHECK(arg == 3);
    CHECK(imp.minCoeff() >= 0.0);
    CHECK(imp.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(audit.attributions == planted.size());
    CHECK(audit.max_efficiency_error <= 1e-9);

    LabeledLatentSet flat;
    flat.codes = Matrix::Constant(10, 2, 0.5);
    flat.labels = {1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
    CHECK_THROWS_WITH_AS(mean_abs_importance(model(Vector::Ones(2), 0), flat), "no variance", ValidationError);
  }

  TEST_CASE("ssim fixtures") {
    const auto a = pattern(24, 24, 0.2, 0.8);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));

    ImageBuffer inv(24, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        for (int c = 0; c < 3; ++c) inv.at(y, x, c) = 1.0 - a.at(y, x, c);
    CHECK(ssim(a, inv) < 0.0);

    const ImageBuffer p(16, 16, 0.3), q(16, 16, 0.6);
    CHECK(ssim(p, q) == doctest::Approx(oracle::ssim_constant(0.3, 0.6)).epsilon(1e-12));

    const auto b = pattern(24, 24, 0.1, 0.6);
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) <= 1e-9);
    CHECK(ssim(a, b) <= 1.0);
    CHECK(ssim(a, b) >= -1.0);

    CHECK_THROWS_AS(ssim(a, ImageBuffer(20, 24)), ValidationError);
    CHECK_THROWS_AS(ssim(ImageBuffer(8, 8), ImageBuffer(8, 8)), ValidationError);
  }
}
