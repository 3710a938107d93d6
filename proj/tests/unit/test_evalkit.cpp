#include <cmath>
#include <numbers>

#include <doctest.h>

#include "colorwai/error.hpp"
#include "colorwai/evalkit.hpp"
#include "colorwai/rng.hpp"

using namespace colorwai;
using namespace colorwai::evalkit;

namespace {

ImageBuffer noise_image(std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer img(16, 16);
  for (auto& v : img.data()) v = rng.uniform();
  return img;
}

/// Plays back the original for alphas in `keep` and unrelated noise for the
/// rest.
class StepSubject final : public EditSubject {
 public:
  explicit StepSubject(std::vector<std::pair<double, double>> keep) : keep_(std::move(keep)) {}
  const ImageBuffer& original() const override { return original_; }
  ImageBuffer edited(const disentangle::DirectionSpec&, double alpha) const override {
    for (auto [lo, hi] : keep_)
      if (alpha >= lo && alpha <= hi) return original_;
    return noise_image(static_cast<std::uint64_t>(alpha * 1000) + 1);
  }

 private:
  ImageBuffer original_ = noise_image(0);
  std::vector<std::pair<double, double>> keep_;
};

/// Two-dimensional latent whose angle is the hue of a striped render.
class HueSubject final : public EditSubject {
 public:
  explicit HueSubject(Eigen::VectorXd z) : z_(std::move(z)), original_(render(z_)) {}
  const ImageBuffer& original() const override { return original_; }
  ImageBuffer edited(const disentangle::DirectionSpec& dir, double alpha) const override {
    return render(disentangle::edit_latent(z_, dir, alpha));
  }

  static ImageBuffer render(const Eigen::VectorXd& z) {
    const double hue = colorlab::normalize_hue(std::atan2(z[1], z[0]) * 180.0 / std::numbers::pi);
    const double sat = std::min(1.0, z.norm()) * 0.8;
    ImageBuffer img(24, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x) img.set_pixel(y, x, colorlab::hsv_to_rgb({hue, sat, x % 6 < 2 ? 0.55 : 0.75}));
    return img;
  }

 private:
  Eigen::VectorXd z_;
  ImageBuffer original_;
};

class HueBackend final : public EditBackend {
 public:
  std::string id() const override { return "hue"; }
  std::string space_tag() const override { return "hue-plane"; }
  std::size_t latent_dim() const override { return 2; }
  CoupledSample couple_sample(std::uint64_t seed) const override {
    const auto z = state(seed);
    return {z, HueSubject::render(z)};
  }
  Eigen::VectorXd state(std::uint64_t seed) const override {
    Rng rng(seed);
    const double a = rng.uniform(0, 2 * std::numbers::pi);
    return Eigen::Vector2d(std::cos(a), std::sin(a));
  }
  std::unique_ptr<EditSubject> subject_from_state(const Eigen::VectorXd& z) const override {
    return std::make_unique<HueSubject>(z);
  }
};

colorlab::ColorCodebook hue_book() {
  colorlab::ColorCodebook book;
  int id = 0;
  for (double h : {0.0, 120.0, 240.0}) {
    colorlab::CodebookEntry e;
    e.id = id++;
    e.hsv = {h, 0.8, 0.7};
    e.lab = colorlab::rgb_to_lab(colorlab::hsv_to_rgb(e.hsv));
    e.name = "c" + std::to_string(e.id);
    book.entries.push_back(e);
  }
  return book;
}

disentangle::DirectionSet hue_directions() {
  disentangle::DirectionSet set;
  set.backend = "hue";
  set.space_tag = "hue-plane";
  set.method = disentangle::Method::interfacegan;
  int id = 0;
  for (double h : {0.0, 120.0, 240.0}) {
    disentangle::DirectionSpec d;
    d.color_id = id++;
    d.space_tag = "hue-plane";
    const double r = h * std::numbers::pi / 180.0;
    d.vector = Eigen::Vector2d(std::cos(r), std::sin(r));
    d.support = {1, 1};
    set.directions.push_back(d);
  }
  return set;
}

}  // namespace

TEST_SUITE("evalkit") {
  TEST_CASE("relaxed score") {
    const std::vector<colorlab::HueInterval> range{{20, 60}};
    CHECK(relaxed_score(range, 20) == 1.0);
    CHECK(relaxed_score(range, 45) == 1.0);
    CHECK(relaxed_score(range, 70) == doctest::Approx(0.9));
    CHECK(relaxed_score(range, 10) == doctest::Approx(0.9));
    CHECK(relaxed_score(range, 110) == doctest::Approx(0.5));
    CHECK(relaxed_score(range, 160) == doctest::Approx(0.0));
    CHECK(relaxed_score(range, 200) == 0.0);
    // Distance wraps around the circle.
    CHECK(relaxed_score(range, 350) == doctest::Approx(0.7));
    const std::vector<colorlab::HueInterval> split{{0, 15}, {345, 360}};
    CHECK(relaxed_score(split, 359) == 1.0);
    CHECK(relaxed_score(split, 25) == doctest::Approx(0.9));
    CHECK(relaxed_score(split, 335) == doctest::Approx(0.9));
  }

  TEST_CASE("config and alpha grid") {
    EvalConfig cfg;
    const auto grid = cfg.alpha_grid();
    CHECK(grid.size() == 61);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == doctest::Approx(3.0));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] - grid[i - 1] == doctest::Approx(0.05));
    CHECK_NOTHROW(cfg.validate());
    nlohmann::json j = cfg;
    CHECK(j.get<EvalConfig>() == cfg);
    auto bad = cfg;
    bad.ssim_ratio = 1.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = cfg;
    bad.alpha_step = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = cfg;
    bad.n_alpha_samples = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
  }

  TEST_CASE("alpha star picks the largest qualifying grid point") {
    const EvalConfig cfg;
    const disentangle::DirectionSpec dir;
    SsimGuard guard;
    CHECK(find_alpha_star(StepSubject({{0, 1.32}}), dir, cfg, &guard) == doctest::Approx(1.3));
    CHECK(find_alpha_star(StepSubject({{0, 0.52}, {1.98, 2.22}}), dir, cfg, &guard) == doctest::Approx(2.2));
    CHECK(find_alpha_star(StepSubject({{0, 0.01}}), dir, cfg, &guard) == 0.0);
    CHECK(find_alpha_star(StepSubject({{0, 10}}), dir, cfg, &guard) == doctest::Approx(3.0));
    CHECK(guard.samples == 4);
    CHECK(guard.violations == 0);
    CHECK(guard.min_ssim == doctest::Approx(1.0));
  }

  TEST_CASE("alpha optimal is the mean over seeded subjects") {
    HueBackend backend;
    auto set = hue_directions();
    EvalConfig cfg;
    cfg.n_alpha_samples = 6;
    SsimGuard guard;
    const double a = alpha_optimal(backend, set.directions[1], cfg, &guard);
    CHECK(guard.samples == 6);
    CHECK(guard.violations == 0);
    double sum = 0;
    for (int i = 0; i < 6; ++i)
      sum += find_alpha_star(*backend.subject(mix_seed(cfg.seed ^ 0xA1FAULL, static_cast<std::uint64_t>(i))),
                             set.directions[1], cfg);
    CHECK(a == doctest::Approx(sum / 6));
    CHECK(a == alpha_optimal(backend, set.directions[1], cfg));
  }

  TEST_CASE("accuracy needs alpha optimal") {
    HueBackend backend;
    const auto book = hue_book();
    auto dir = hue_directions().directions[0];
    EvalConfig cfg;
    cfg.m_eval_samples = 30;
    CHECK_THROWS_AS(pseudo_accuracy(backend, book, dir, cfg), ValidationError);
    dir.alpha_optimal = 0.0;
    // A zero edit never changes the main color, and already-target samples
    // are excluded.
    const auto acc = pseudo_accuracy(backend, book, dir, cfg);
    CHECK(acc.value == 0.0);
    CHECK(acc.n_used > 0);
    CHECK(acc.n_used < 30);
    dir.alpha_optimal = 3.0;
    const auto strong = pseudo_accuracy(backend, book, dir, cfg);
    CHECK(strong.n_used == acc.n_used);
    CHECK(strong.value > 0.5);
    CHECK(relaxed_accuracy(backend, book, dir, cfg).value >= strong.value);
  }

  TEST_CASE("full evaluation on a hue backend") {
    HueBackend backend;
    const auto book = hue_book();
    auto set = hue_directions();
    EvalConfig cfg;
    cfg.n_alpha_samples = 8;
    cfg.m_eval_samples = 40;
    const auto report = evaluate(backend, book, set, cfg);
    CHECK(report.backend == "hue");
    REQUIRE(report.rows.size() == 3);
    CHECK(report.ssim_guard.samples == 24);
    CHECK(report.ssim_guard.violations == 0);
    REQUIRE(report.confusion.size() == 3);
    for (const auto& row : report.rows) {
      const auto& d = *set.find(row.color_id);
      REQUIRE(d.alpha_optimal.has_value());
      CHECK(*d.alpha_optimal == row.alpha_optimal);
      CHECK(row.p_acc >= 0.0);
      CHECK(row.p_acc <= 1.0);
      std::size_t total = 0;
      for (auto v : report.confusion[static_cast<std::size_t>(row.color_id)]) total += v;
      CHECK(total == row.n_used);
      CHECK(report.confusion[static_cast<std::size_t>(row.color_id)][static_cast<std::size_t>(row.color_id)] ==
            static_cast<std::size_t>(std::lround(row.p_acc * static_cast<double>(row.n_used))));
      REQUIRE(row.relaxed_acc.has_value());
      CHECK(*row.relaxed_acc >= row.p_acc);
    }
    CHECK(report.p_acc.count == 3);
    auto again = hue_directions();
    CHECK(evaluate(backend, book, again, cfg) == report);

    nlohmann::json j = report;
    CHECK(j.get<EvalReport>() == report);
    const auto csv = rows_csv(report);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    const auto m = matrix_csv(report.confusion);
    CHECK(std::count(m.begin(), m.end(), '\n') >= 3);
  }

  TEST_CASE("representation report") {
    auto set = hue_directions();
    const auto rep = representation_report(set);
    CHECK(rep.color_ids == std::vector<int>{0, 1, 2});
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(rep.cosine[i][i] == doctest::Approx(1.0));
      CHECK(rep.overlap[i][i] == rep.support_sizes[i]);
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(rep.cosine[i][k] == rep.cosine[k][i]);
        if (i != k) CHECK(rep.cosine[i][k] == doctest::Approx(-0.5));
      }
    }
    nlohmann::json j = rep;
    CHECK(j.get<RepresentationReport>() == rep);
    set.directions[2].space_tag = "other";
    CHECK_THROWS_AS(representation_report(set), ValidationError);
  }
}
