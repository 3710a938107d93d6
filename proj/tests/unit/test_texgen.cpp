#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include <doctest.h>

#include "colorwai/backends.hpp"
#include "colorwai/error.hpp"
#include "colorwai/rng.hpp"
#include "colorwai/texgen.hpp"
#include "fixtures.hpp"

using namespace colorwai;
using namespace colorwai::texgen;

namespace {

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

std::vector<double> as_vector(const PatternParams& p) {
  return {p.base_hue, p.base_sat, p.base_val, p.accent_hue_offset, p.motif_weights[0], p.motif_weights[1],
          p.motif_weights[2], p.motif_weights[3], p.frequency, p.rotation, p.phase, p.contrast};
}

}  // namespace

TEST_SUITE("texgen") {
  TEST_CASE("latent sampling") {
    const ProceduralGenerator gen;
    CHECK(gen.sample_latent(5).coords == gen.sample_latent(5).coords);
    CHECK(gen.sample_latent(5).coords != gen.sample_latent(6).coords);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(64), sq = sum;
    for (int i = 0; i < 10000; ++i) {
      const auto z = gen.sample_latent(mix_seed(1, i)).coords;
      sum += z;
      sq += z.cwiseProduct(z);
    }
    const Eigen::VectorXd mean = sum / 10000.0;
    const Eigen::VectorXd var = sq / 10000.0 - mean.cwiseProduct(mean);
    CHECK(mean.cwiseAbs().maxCoeff() <= 0.05);
    CHECK(var.minCoeff() >= 0.9);
    CHECK(var.maxCoeff() <= 1.1);
  }

  TEST_CASE("zero latent maps to the frozen golden parameters") {
    const ProceduralGenerator gen;
    const auto params = gen.map_latent(Eigen::VectorXd::Zero(64));
    std::ifstream in(std::string(COLORWAI_TEST_DATA_DIR) + "/golden/texgen_z0.json");
    REQUIRE(in.good());
    const auto golden = nlohmann::json::parse(in).get<PatternParams>();
    const auto got = as_vector(params), want = as_vector(golden);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }

  TEST_CASE("mapping is smooth and deterministic") {
    const ProceduralGenerator gen;
    const ProceduralGenerator again;
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const auto z = gen.sample_latent(mix_seed(2, trial)).coords;
      Eigen::VectorXd dz(64);
      for (int i = 0; i < 64; ++i) dz[i] = rng.normal();
      dz *= 1e-6 / dz.norm();
      const auto a = as_vector(gen.map_latent(z)), b = as_vector(gen.map_latent(Eigen::VectorXd(z + dz)));
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-3);
      CHECK(a == as_vector(again.map_latent(z)));
      const auto img = gen.synthesize(z);
      CHECK(img == again.synthesize(z));
      Eigen::VectorXd d4 = dz * (1e-4 / 1e-6);
      CHECK(max_abs_diff(img, gen.synthesize(Eigen::VectorXd(z + d4))) < 1e-2);
    }
    CHECK_THROWS_AS(gen.map_latent(Eigen::VectorXd::Zero(3)), ValidationError);
    LatentCode wrong;
    wrong.coords = Eigen::VectorXd::Zero(64);
    wrong.space_tag = "h-analog";
    CHECK_THROWS_AS(gen.map_latent(wrong), ValidationError);
  }

  TEST_CASE("stripes have the requested period") {
    PatternParams p;
    p.base_hue = 30;
    p.base_sat = 0.7;
    p.base_val = 0.8;
    p.accent_hue_offset = 120;
    p.motif_weights = {1, 0, 0, 0};
    p.frequency = 4;
    p.rotation = 0;
    p.phase = 0;
    p.contrast = 1;
    const int n = 64;
    const auto img = render_pattern(p, n);
    // Column profile of the red channel; a plain DFT picks the dominant bin.
    std::vector<double> col(n, 0.0);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) col[x] += img.at(y, x, 0) / n;
    int best = 0;
    double best_mag = -1;
    for (int k = 1; k < n / 2; ++k) {
      std::complex<double> acc = 0;
      for (int x = 0; x < n; ++x) acc += col[x] * std::polar(1.0, -2 * std::numbers::pi * k * x / n);
      if (std::abs(acc) > best_mag) best_mag = std::abs(acc), best = k;
    }
    CHECK(best == 4);
    // Vertical stripes: every row is identical.
    for (int y = 1; y < n; ++y)
      for (int x = 0; x < n; ++x) CHECK(img.at(y, x, 1) == img.at(0, x, 1));
  }

  TEST_CASE("degenerate blends") {
    PatternParams p;
    p.base_hue = 200;
    p.base_sat = 0.6;
    p.base_val = 0.7;
    p.accent_hue_offset = 90;
    p.motif_weights = {0.25, 0.25, 0.25, 0.25};
    p.contrast = 0;
    const auto flat = render_pattern(p, 32);
    const auto c = colorlab::hsv_to_rgb({200, 0.6, 0.7});
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        CHECK(flat.at(y, x, 0) == doctest::Approx(c.r));
        CHECK(flat.at(y, x, 2) == doctest::Approx(c.b));
      }
    p.contrast = 1;
    p.base_sat = 0;
    const auto gray = render_pattern(p, 32);
    double spread = 0;
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const auto px = gray.pixel(y, x);
        spread = std::max(spread, std::max({px.r, px.g, px.b}) - std::min({px.r, px.g, px.b}));
      }
    CHECK(spread < 1e-6);
    p.frequency = 40;
    CHECK_THROWS_AS(render_pattern(p, 32), ValidationError);
  }

  TEST_CASE("params and config json") {
    const ProceduralGenerator gen;
    const auto p = gen.map_latent(gen.sample_latent(3));
    nlohmann::json j = p;
    const auto back = j.get<PatternParams>();
    CHECK(as_vector(back) == as_vector(p));
    GeneratorConfig cfg;
    cfg.mapping_seed = 99;
    nlohmann::json jc = cfg;
    CHECK(jc.get<GeneratorConfig>() == cfg);
  }

  TEST_CASE("every codebook color is reachable") {
    const auto& fx = fixtures::texgen();
    std::vector<int> seen(fx.book.size(), 0);
    for (int c : fx.data.color_ids) ++seen[static_cast<std::size_t>(c)];
    for (std::size_t c = 0; c < seen.size(); ++c) CHECK_MESSAGE(seen[c] > 0, "color ", c);
  }

  TEST_CASE("oracle gradient") {
    const auto& fx = fixtures::texgen();
    const auto& gen = fx.backend->generator();
    const colorlab::AnnotationConfig cfg;
    // A chromatic color and the chromatic color farthest from it in hue.
    int c = -1, opposite = -1;
    for (const auto& e : fx.book.entries)
      if (fx.book.is_chromatic(e.id) && c < 0) c = e.id;
    double far = -1;
    for (const auto& e : fx.book.entries) {
      if (!fx.book.is_chromatic(e.id)) continue;
      const double d = colorlab::hue_distance(e.hsv.h, fx.book.at(c).hsv.h);
      if (d > far) far = d, opposite = e.id;
    }
    REQUIRE(c >= 0);
    REQUIRE(far > 120);

    int improved = 0, negative = 0, total = 0;
    for (int i = 0; i < 100; ++i) {
      const auto z = gen.sample_latent(mix_seed(31, i)).coords;
      Eigen::VectorXd g, go;
      try {
        g = oracle_color_gradient(gen, z, c, fx.book, cfg);
        go = oracle_color_gradient(gen, z, opposite, fx.book, cfg);
      } catch (const std::runtime_error&) {
        continue;
      }
      ++total;
      CHECK(g.norm() == doctest::Approx(1.0));
      const double before = oracle_color_score(gen, z, c, fx.book, cfg);
      const double after = oracle_color_score(gen, Eigen::VectorXd(z + 0.05 * g), c, fx.book, cfg);
      improved += after > before;
      negative += g.dot(go) < 0;
    }
    CHECK(total >= 95);
    CHECK(improved >= 0.9 * total);
    CHECK(negative >= 0.8 * total);
  }
}
