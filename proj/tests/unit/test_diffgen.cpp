#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "colorwai/backends.hpp"
#include "colorwai/diffgen.hpp"
#include "colorwai/error.hpp"
#include "colorwai/rng.hpp"
#include "oracles.hpp"

using namespace colorwai;
using namespace colorwai::diffgen;

namespace {

Eigen::VectorXd normal_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

/// Small 8x8 corpus of texgen renders.
std::vector<ImageBuffer> tiny_corpus(std::size_t n) {
  const texgen::ProceduralGenerator gen;
  std::vector<ImageBuffer> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(gen.synthesize(gen.sample_latent(mix_seed(40, i)).coords, 8));
  return out;
}

const DenoiserArch kTiny{192, 64, 128, 16};

}  // namespace

TEST_SUITE("diffgen") {
  TEST_CASE("schedule matches an independent recomputation") {
    const auto sched = NoiseSchedule::linear();
    const auto ab = oracle::linear_alpha_bar(1000, 1e-4, 0.02);
    CHECK(sched.alpha_bar_at(0) == 1.0);
    for (int t = 1; t <= 1000; ++t) {
      CHECK(sched.alpha_bar_at(t) == doctest::Approx(ab[static_cast<std::size_t>(t)]).epsilon(1e-12));
      CHECK(sched.alpha_bar_at(t) < sched.alpha_bar_at(t - 1));
    }
    CHECK_THROWS_AS(NoiseSchedule::linear(1000, 0.0, 0.02), ValidationError);
    CHECK_THROWS_AS(NoiseSchedule::linear(1000, 0.1, 0.01), ValidationError);
    CHECK_THROWS_AS(sched.alpha_bar_at(1001), ValidationError);
  }

  TEST_CASE("forward noise") {
    const auto sched = NoiseSchedule::linear();
    Rng rng(1);
    const auto x0 = normal_vector(50, rng), eps = normal_vector(50, rng);
    CHECK(forward_noise(x0, 0, eps, sched) == x0);
    const Eigen::VectorXd scaled = forward_noise(x0, 500, Eigen::VectorXd::Zero(50), sched);
    const auto ab = oracle::linear_alpha_bar(1000, 1e-4, 0.02);
    CHECK((scaled - std::sqrt(ab[500]) * x0).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd noisy = forward_noise(x0, 321, eps, sched);
    const Eigen::VectorXd want = std::sqrt(ab[321]) * x0 + std::sqrt(1 - ab[321]) * eps;
    CHECK((noisy - want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(forward_noise(x0, 3, normal_vector(49, rng), sched), ValidationError);

    // Marginal variance over fresh noise.
    const Eigen::VectorXd one = Eigen::VectorXd::Constant(1, 0.3);
    double sum = 0, sq = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const double v = forward_noise(one, 700, normal_vector(1, rng), sched)[0];
      sum += v;
      sq += v * v;
    }
    const double var = sq / n - (sum / n) * (sum / n);
    CHECK(std::abs(var / (1 - ab[700]) - 1) < 0.05);

    ImageBuffer img(4, 4, 0.25), noise(4, 4, 0.0);
    const auto same = forward_noise(img, 0, noise, sched);
    CHECK(same.at(1, 1, 1) == doctest::Approx(0.25));
  }

  TEST_CASE("ddim step identities") {
    const auto sched = NoiseSchedule::linear();
    Rng rng(2);
    const Eigen::MatrixXd x0 = normal_vector(30, rng), eps = normal_vector(30, rng);
    const Eigen::MatrixXd xt = forward_noise(Eigen::VectorXd(x0), 600, Eigen::VectorXd(eps), sched);
    CHECK(ddim_step(xt, 600, 600, eps, sched) == xt);
    // With the true noise the predicted image is x0, and alpha_bar(0) = 1.
    CHECK((ddim_step(xt, 600, 0, eps, sched) - x0).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(ddim_step_split(xt, 600, 200, eps, eps, sched) == ddim_step(xt, 600, 200, eps, sched));
    const GaussianOracle model(sched, Eigen::VectorXd::Zero(30), Eigen::VectorXd::Ones(30));
    CHECK_THROWS_AS(ddim_step(xt, 100, 200, model, sched), ValidationError);
  }

  TEST_CASE("two ddim steps follow the symbolic composition") {
    const auto sched = NoiseSchedule::linear(4, 0.1, 0.4);
    const auto ab = oracle::linear_alpha_bar(4, 0.1, 0.4);
    Rng rng(3);
    const Eigen::MatrixXd x = normal_vector(5, rng), e1 = normal_vector(5, rng), e2 = normal_vector(5, rng);
    const auto mid = ddim_step(x, 4, 2, e1, sched);
    const auto end = ddim_step(mid, 2, 1, e2, sched);
    for (int i = 0; i < 5; ++i)
      CHECK(end(i, 0) == doctest::Approx(oracle::ddim_two_step(x(i, 0), ab[4], ab[2], ab[1], e1(i, 0), e2(i, 0)))
                             .epsilon(1e-12));
  }

  TEST_CASE("timestep grid") {
    const auto sched = NoiseSchedule::linear();
    const int include[] = {350};
    const auto ts = ddim_timesteps(sched, 50, include);
    CHECK(ts.front() == 0);
    CHECK(ts.back() == 1000);
    CHECK(std::is_sorted(ts.begin(), ts.end()));
    CHECK(std::find(ts.begin(), ts.end(), 350) != ts.end());
    CHECK(std::adjacent_find(ts.begin(), ts.end()) == ts.end());
  }

  TEST_CASE("gaussian oracle round trip is exact") {
    const auto sched = NoiseSchedule::linear();
    Rng rng(4);
    const Eigen::Index d = 16;
    Eigen::VectorXd mean(d), var(d);
    for (Eigen::Index i = 0; i < d; ++i) mean[i] = 0.5 * rng.normal(), var[i] = 0.05 + rng.uniform();
    const GaussianOracle model(sched, mean, var);
    Eigen::MatrixXd x0(d, 8);
    for (Eigen::Index j = 0; j < 8; ++j)
      for (Eigen::Index i = 0; i < d; ++i) x0(i, j) = mean[i] + std::sqrt(var[i]) * rng.normal();
    const InversionConfig inv;
    const auto traj = ddim_invert(x0, model, sched, inv);
    CHECK(traj.step_indices.front() == 0);
    CHECK(traj.step_indices.back() == 1000);
    CHECK(traj.states.front() == x0);
    CHECK(traj.at(1000) == traj.states.back());
    CHECK(std::is_sorted(traj.step_indices.begin(), traj.step_indices.end()));
    const auto back = ddim_sample(traj.states.back(), traj.step_indices, model, sched);
    CHECK((back - x0).cwiseAbs().maxCoeff() <= 1e-6);
    const auto again = ddim_sample(ddim_invert(x0, model, sched, inv).states.back(), traj.step_indices, model, sched);
    CHECK(again == back);
    CHECK_THROWS_AS(traj.at(351), NotFoundError);
  }

  TEST_CASE("denoiser training") {
    const auto sched = NoiseSchedule::linear();
    const auto corpus = tiny_corpus(64);
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 16;
    tc.seed = 5;
    const auto a = train_denoiser(corpus, sched, tc, kTiny);
    const auto b = train_denoiser(corpus, sched, tc, kTiny);
    CHECK(a == b);
    CHECK(a.loss_history.size() == 3);

    // Fixed evaluation batch: untrained network with the same statistics vs
    // one epoch of training.
    Denoiser init(sched, kTiny, tc.seed);
    init.set_data_stats(a.data_mean(), a.data_variance());
    Rng rng(6);
    Eigen::MatrixXd x0(192, 256), eps(192, 256);
    std::vector<int> ts;
    for (Eigen::Index j = 0; j < 256; ++j) {
      x0.col(j) = to_model_space(corpus[static_cast<std::size_t>(j) % corpus.size()]);
      eps.col(j) = normal_vector(192, rng);
      ts.push_back(1 + static_cast<int>(rng.index(1000)));
    }
    tc.epochs = 1;
    const auto one = train_denoiser(corpus, sched, tc, kTiny);
    CHECK(one.loss(x0, ts, eps) < init.loss(x0, ts, eps));

    CHECK_THROWS_AS(train_denoiser(std::vector<ImageBuffer>{}, sched, tc, kTiny), ValidationError);
  }

  TEST_CASE("overfitting a single image") {
    const auto sched = NoiseSchedule::linear();
    // One image, repeated so each epoch takes several minibatch steps.
    const std::vector<ImageBuffer> corpus(64, tiny_corpus(1)[0]);
    TrainConfig tc;
    tc.epochs = 50;
    tc.batch_size = 16;
    const auto den = train_denoiser(corpus, sched, tc, kTiny);
    Denoiser init(sched, kTiny, tc.seed);
    init.set_data_stats(den.data_mean(), den.data_variance());
    Rng rng(7);
    Eigen::MatrixXd x0(192, 64), eps(192, 64);
    for (Eigen::Index j = 0; j < 64; ++j) x0.col(j) = to_model_space(corpus[0]), eps.col(j) = normal_vector(192, rng);
    const std::vector<int> ts(64, 500);
    CHECK(den.loss(x0, ts, eps) < 0.5 * init.loss(x0, ts, eps));
  }

  TEST_CASE("bottleneck, persistence and editing") {
    const auto sched = NoiseSchedule::linear();
    const auto corpus = tiny_corpus(16);
    TrainConfig tc;
    tc.epochs = 2;
    const auto den = train_denoiser(corpus, sched, tc, kTiny);

    const Eigen::MatrixXd x = to_model_space(corpus[0]);
    const auto h = den.h_activation(x, 350);
    CHECK(h.rows() == 128);
    CHECK(h == den.h_activation(x, 350));
    CHECK(den.predict(x, 350).rows() == 192);
    CHECK(den.predict_shifted(x, 350, Eigen::VectorXd::Zero(128)) == den.predict(x, 350));

    const auto path = std::filesystem::temp_directory_path() / "colorwai_unit_denoiser.bin";
    den.save(path);
    const auto loaded = Denoiser::load(path);
    CHECK(loaded == den);
    CHECK(loaded.predict(x, 77) == den.predict(x, 77));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(Denoiser::load(path), NotFoundError);

    const MixingConfig mix;
    disentangle::DirectionSpec dir;
    dir.space_tag = kHSpaceTag;
    Rng rng(8);
    dir.vector = normal_vector(128, rng).normalized();
    dir.support.assign(128, 1);
    const InversionConfig inv{50, 5, 1e-10};
    const auto rec = reconstruct(corpus[1], mix, den, inv);
    CHECK(edited_sample(corpus[1], dir, 0.0, mix, den, inv) == rec);
    CHECK(edited_sample(corpus[1], dir, 0.0, mix, den, inv) == edited_sample(corpus[1], dir, 0.0, mix, den, inv));
    CHECK_FALSE(edited_sample(corpus[1], dir, 2.0, mix, den, inv) == rec);

    MixingConfig input_mix;
    input_mix.target = MixTarget::input_space;
    CHECK_THROWS_WITH_AS(edited_sample(corpus[1], dir, 1.0, input_mix, den, inv), "direction/space mismatch",
                         ValidationError);
    disentangle::DirectionSpec xdir = dir;
    xdir.space_tag = kInputSpaceTag;
    xdir.vector = normal_vector(192, rng).normalized();
    xdir.support.assign(192, 1);
    CHECK(edited_sample(corpus[1], xdir, 0.0, input_mix, den, inv) == reconstruct(corpus[1], input_mix, den, inv));

    MixingConfig bad;
    bad.t_mix = 1000;
    CHECK_THROWS_AS(bad.validate(sched), ValidationError);
  }

  TEST_CASE("backend zero edit equals reconstruction") {
    const auto sched = NoiseSchedule::linear();
    auto gen = std::make_shared<const texgen::ProceduralGenerator>();
    const auto corpus = tiny_corpus(16);
    TrainConfig tc;
    tc.epochs = 1;
    auto den = std::make_shared<const Denoiser>(train_denoiser(corpus, sched, tc, kTiny));
    const InversionConfig inv{50, 3, 1e-10};
    DiffgenBackend backend(den, [gen](std::uint64_t s) { return gen->synthesize(gen->sample_latent(s).coords, 8); },
                           MixingConfig{}, inv);
    CHECK(backend.latent_dim() == 128);
    CHECK(backend.space_tag() == kHSpaceTag);
    const auto subject = backend.subject(3);
    disentangle::DirectionSpec dir;
    dir.space_tag = kHSpaceTag;
    dir.vector = Eigen::VectorXd::Unit(128, 4);
    dir.support.assign(128, 0);
    dir.support[4] = 1;
    CHECK(subject->edited(dir, 0.0) == subject->original());
    const auto img = gen->synthesize(gen->sample_latent(3).coords, 8);
    CHECK(subject->original() == reconstruct(img, MixingConfig{}, *den, inv));
    const auto sample = backend.couple_sample(3);
    CHECK(sample.code.size() == 128);
    CHECK(sample.image == img);
  }
}
