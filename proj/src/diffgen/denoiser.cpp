#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>

#include "colorwai/diffgen.hpp"
#include "colorwai/error.hpp"
#include "colorwai/rng.hpp"
#include "json.hpp"

namespace colorwai::diffgen {
namespace {

static_assert(std::endian::native == std::endian::little, "weights file assumes a little-endian host");

Eigen::MatrixXf silu(const Eigen::MatrixXf& a) { return (a.array() / (1.0f + (-a.array()).exp())).matrix(); }

Eigen::MatrixXf silu_grad(const Eigen::MatrixXf& a) {
  const Eigen::ArrayXXf s = 1.0f / (1.0f + (-a.array()).exp());
  return (s * (1.0f + a.array() * (1.0f - s))).matrix();
}

void fill_normal(Eigen::MatrixXf& m, Rng& rng, double scale) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(rng.normal() * scale);
}

}  // namespace

struct Denoiser::Cache {
  Eigen::MatrixXf x, tf, a1, z1, h, a2, z2;
};

Denoiser::Denoiser(const NoiseSchedule& sched, DenoiserArch arch, std::uint64_t init_seed)
    : sched_(sched), arch_(arch) {
  if (arch_.input < 1 || arch_.hidden < 1 || arch_.bottleneck < 1 || arch_.time_features < 2 ||
      arch_.time_features % 2 != 0)
    throw ValidationError("invalid denoiser architecture");
  Rng rng(mix_seed(init_seed, 0xd0e5));
  w_in_.resize(arch_.hidden, arch_.input);
  w_time_.resize(arch_.hidden, arch_.time_features);
  w_h_.resize(arch_.bottleneck, arch_.hidden);
  w_up_.resize(arch_.hidden, arch_.bottleneck);
  w_out_.resize(arch_.input, arch_.hidden);
  fill_normal(w_in_, rng, std::sqrt(2.0 / arch_.input));
  fill_normal(w_time_, rng, std::sqrt(1.0 / arch_.time_features));
  fill_normal(w_h_, rng, std::sqrt(1.0 / arch_.hidden));
  fill_normal(w_up_, rng, std::sqrt(2.0 / arch_.bottleneck));
  // Small output weights: training starts from the closed-form Gaussian term.
  fill_normal(w_out_, rng, 0.1 * std::sqrt(1.0 / arch_.hidden));
  b_in_ = Eigen::VectorXf::Zero(arch_.hidden);
  b_h_ = Eigen::VectorXf::Zero(arch_.bottleneck);
  b_up_ = Eigen::VectorXf::Zero(arch_.hidden);
  b_out_ = Eigen::VectorXf::Zero(arch_.input);
}

void Denoiser::set_data_stats(double mean, double variance) {
  if (!(variance >= 0.0) || !std::isfinite(mean)) throw ValidationError("invalid data statistics");
  data_mean_ = mean;
  data_variance_ = variance;
}

Eigen::MatrixXf Denoiser::time_features(const std::vector<int>& ts) const {
  const int half = arch_.time_features / 2;
  Eigen::MatrixXf tf(arch_.time_features, static_cast<Eigen::Index>(ts.size()));
  for (std::size_t j = 0; j < ts.size(); ++j) {
    for (int i = 0; i < half; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / half);
      tf(i, static_cast<Eigen::Index>(j)) = static_cast<float>(std::sin(ts[j] * freq));
      tf(half + i, static_cast<Eigen::Index>(j)) = static_cast<float>(std::cos(ts[j] * freq));
    }
  }
  return tf;
}

Eigen::MatrixXd Denoiser::linear_term(const Eigen::MatrixXd& x, int t) const {
  const double a = sched_.alpha_bar_at(t);
  const double gain = std::sqrt(1.0 - a) / (a * data_variance_ + (1.0 - a));
  return gain * (x.array() - std::sqrt(a) * data_mean_).matrix();
}

Eigen::MatrixXf Denoiser::encode(const Eigen::MatrixXf& x, const Eigen::MatrixXf& tf, Cache* cache) const {
  Eigen::MatrixXf a1 = w_in_ * x + w_time_ * tf;
  a1.colwise() += b_in_;
  Eigen::MatrixXf z1 = silu(a1);
  Eigen::MatrixXf h = w_h_ * z1;
  h.colwise() += b_h_;
  if (cache) {
    cache->a1 = std::move(a1);
    cache->z1 = std::move(z1);
  }
  return h;
}

Eigen::MatrixXf Denoiser::decode(const Eigen::MatrixXf& h, Cache* cache) const {
  Eigen::MatrixXf a2 = w_up_ * h;
  a2.colwise() += b_up_;
  Eigen::MatrixXf z2 = silu(a2);
  Eigen::MatrixXf r = w_out_ * z2;
  r.colwise() += b_out_;
  if (cache) {
    cache->a2 = std::move(a2);
    cache->z2 = std::move(z2);
  }
  return r;
}

Eigen::MatrixXd Denoiser::h_activation(const Eigen::MatrixXd& x, int t) const {
  if (x.rows() != arch_.input) throw ValidationError("shape mismatch");
  sched_.alpha_bar_at(t);
  const Eigen::MatrixXf tf = time_features({t});
  Eigen::MatrixXd out(arch_.bottleneck, x.cols());
  // One column at a time so a result never depends on batch composition.
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    out.col(j) = encode(x.col(j).cast<float>(), tf, nullptr).cast<double>();
  return out;
}

Eigen::MatrixXd Denoiser::predict(const Eigen::MatrixXd& x, int t) const {
  return predict_shifted(x, t, Eigen::VectorXd::Zero(arch_.bottleneck));
}

Eigen::MatrixXd Denoiser::predict_shifted(const Eigen::MatrixXd& x, int t, const Eigen::VectorXd& dh) const {
  if (x.rows() != arch_.input) throw ValidationError("shape mismatch");
  if (dh.size() != arch_.bottleneck) throw ValidationError("dimension mismatch");
  const Eigen::MatrixXf tf = time_features({t});
  const bool shifted = !dh.isZero(0.0);
  const Eigen::VectorXf shift = dh.cast<float>();
  Eigen::MatrixXd out = linear_term(x, t);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::MatrixXf h = encode(x.col(j).cast<float>(), tf, nullptr);
    if (shifted) h.col(0) += shift;
    out.col(j) += decode(h, nullptr).col(0).cast<double>();
  }
  return out;
}

double Denoiser::loss(const Eigen::MatrixXd& x0, const std::vector<int>& ts, const Eigen::MatrixXd& eps) const {
  if (x0.cols() != static_cast<Eigen::Index>(ts.size()) || x0.rows() != eps.rows() || x0.cols() != eps.cols())
    throw ValidationError("shape mismatch");
  double total = 0.0;
  for (Eigen::Index j = 0; j < x0.cols(); ++j) {
    const int t = ts[static_cast<std::size_t>(j)];
    const Eigen::VectorXd xt = forward_noise(Eigen::VectorXd(x0.col(j)), t, Eigen::VectorXd(eps.col(j)), sched_);
    total += (predict(xt, t).col(0) - eps.col(j)).squaredNorm();
  }
  return total / static_cast<double>(x0.size());
}

bool Denoiser::operator==(const Denoiser& o) const {
  return arch_.input == o.arch_.input && arch_.hidden == o.arch_.hidden && arch_.bottleneck == o.arch_.bottleneck &&
         arch_.time_features == o.arch_.time_features && sched_.T == o.sched_.T &&
         sched_.beta_min == o.sched_.beta_min && sched_.beta_max == o.sched_.beta_max &&
         data_mean_ == o.data_mean_ && data_variance_ == o.data_variance_ && w_in_ == o.w_in_ &&
         w_time_ == o.w_time_ && w_h_ == o.w_h_ && w_up_ == o.w_up_ && w_out_ == o.w_out_ && b_in_ == o.b_in_ &&
         b_h_ == o.b_h_ && b_up_ == o.b_up_ && b_out_ == o.b_out_;
}

// Adam over the denoiser parameters with full backpropagation.
class Trainer {
 public:
  explicit Trainer(Denoiser& den) : den_(den) {
    for (auto* p : params()) {
      m_.push_back(Eigen::MatrixXf::Zero(p->rows(), p->cols()));
      v_.push_back(Eigen::MatrixXf::Zero(p->rows(), p->cols()));
    }
  }

  // One optimizer step on a batch of noised inputs; returns the batch loss.
  double step(const Eigen::MatrixXd& x0, const std::vector<int>& ts, const Eigen::MatrixXd& eps, double lr) {
    const Eigen::Index batch = x0.cols();
    Eigen::MatrixXd xt(x0.rows(), batch);
    Eigen::MatrixXd target(x0.rows(), batch);
    for (Eigen::Index j = 0; j < batch; ++j) {
      const int t = ts[static_cast<std::size_t>(j)];
      xt.col(j) = forward_noise(Eigen::VectorXd(x0.col(j)), t, Eigen::VectorXd(eps.col(j)), den_.sched_);
      // The network fits what the closed-form linear term leaves over.
      target.col(j) = eps.col(j) - den_.linear_term(xt.col(j), t).col(0);
    }
    Denoiser::Cache c;
    c.x = xt.cast<float>();
    c.tf = den_.time_features(ts);
    c.h = den_.encode(c.x, c.tf, &c);
    const Eigen::MatrixXf r = den_.decode(c.h, &c);
    const Eigen::MatrixXf diff = r - target.cast<float>();
    const double loss = static_cast<double>(diff.squaredNorm()) / static_cast<double>(diff.size());

    const float scale = 2.0f / static_cast<float>(diff.size());
    const Eigen::MatrixXf g_r = scale * diff;
    const Eigen::MatrixXf g_a2 = (den_.w_out_.transpose() * g_r).cwiseProduct(silu_grad(c.a2));
    const Eigen::MatrixXf g_h = den_.w_up_.transpose() * g_a2;
    const Eigen::MatrixXf g_a1 = (den_.w_h_.transpose() * g_h).cwiseProduct(silu_grad(c.a1));

    std::vector<Eigen::MatrixXf> grads;
    grads.push_back(g_a1 * c.x.transpose());
    grads.push_back(g_a1 * c.tf.transpose());
    grads.push_back(g_h * c.z1.transpose());
    grads.push_back(g_a2 * c.h.transpose());
    grads.push_back(g_r * c.z2.transpose());
    grads.push_back(g_a1.rowwise().sum());
    grads.push_back(g_h.rowwise().sum());
    grads.push_back(g_a2.rowwise().sum());
    grads.push_back(g_r.rowwise().sum());
    apply(grads, lr);
    return loss;
  }

 private:
  std::vector<Eigen::MatrixXf*> params() {
    return {&den_.w_in_, &den_.w_time_, &den_.w_h_, &den_.w_up_, &den_.w_out_};
  }
  std::vector<Eigen::VectorXf*> biases() { return {&den_.b_in_, &den_.b_h_, &den_.b_up_, &den_.b_out_}; }

  void apply(const std::vector<Eigen::MatrixXf>& grads, double lr) {
    constexpr float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
    ++t_;
    const float c1 = 1.0f - std::pow(b1, static_cast<float>(t_));
    const float c2 = 1.0f - std::pow(b2, static_cast<float>(t_));
    const float step = static_cast<float>(lr);
    auto update = [&](float* p, const float* g, Eigen::Index n, std::size_t slot) {
      if (slot >= m_.size()) {
        m_.push_back(Eigen::MatrixXf::Zero(n, 1));
        v_.push_back(Eigen::MatrixXf::Zero(n, 1));
      }
      Eigen::Map<Eigen::ArrayXf> pa(p, n);
      Eigen::Map<const Eigen::ArrayXf> ga(g, n);
      Eigen::Map<Eigen::ArrayXf> ma(m_[slot].data(), n);
      Eigen::Map<Eigen::ArrayXf> va(v_[slot].data(), n);
      ma = b1 * ma + (1.0f - b1) * ga;
      va = b2 * va + (1.0f - b2) * ga.square();
      pa -= step * (ma / c1) / ((va / c2).sqrt() + eps);
    };
    auto ps = params();
    auto bs = biases();
    for (std::size_t i = 0; i < ps.size(); ++i) update(ps[i]->data(), grads[i].data(), ps[i]->size(), i);
    for (std::size_t i = 0; i < bs.size(); ++i)
      update(bs[i]->data(), grads[ps.size() + i].data(), bs[i]->size(), ps.size() + i);
  }

  Denoiser& den_;
  std::vector<Eigen::MatrixXf> m_, v_;
  long t_ = 0;
};

Denoiser train_denoiser(std::span<const ImageBuffer> corpus, const NoiseSchedule& sched, const TrainConfig& cfg,
                        DenoiserArch arch) {
  if (corpus.empty()) throw ValidationError("empty corpus");
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
    throw ValidationError("invalid training config");
  for (const auto& img : corpus) {
    if (!img.same_shape(corpus.front())) throw ValidationError("corpus images differ in shape");
  }
  arch.input = corpus.front().width() * corpus.front().height() * 3;

  Eigen::MatrixXd data(arch.input, static_cast<Eigen::Index>(corpus.size()));
  for (std::size_t i = 0; i < corpus.size(); ++i) data.col(static_cast<Eigen::Index>(i)) = to_model_space(corpus[i]);
  const double mean = data.mean();
  const double variance = (data.array() - mean).square().mean();

  Denoiser den(sched, arch, cfg.seed);
  den.set_data_stats(mean, variance);
  Trainer trainer(den);
  Rng rng(mix_seed(cfg.seed, 0x7a1));
  std::vector<Eigen::Index> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto b = static_cast<Eigen::Index>(end - start);
      Eigen::MatrixXd x0(arch.input, b);
      Eigen::MatrixXd eps(arch.input, b);
      std::vector<int> ts(static_cast<std::size_t>(b));
      for (Eigen::Index j = 0; j < b; ++j) {
        x0.col(j) = data.col(order[start + static_cast<std::size_t>(j)]);
        ts[static_cast<std::size_t>(j)] = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(sched.T)));
        for (Eigen::Index k = 0; k < arch.input; ++k) eps(k, j) = rng.normal();
      }
      epoch_loss += trainer.step(x0, ts, eps, cfg.learning_rate);
      ++batches;
    }
    den.loss_history.push_back(epoch_loss / static_cast<double>(batches));
  }
  return den;
}

namespace {

void write_tensor(std::ofstream& out, const float* data, Eigen::Index n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
}

void read_tensor(std::ifstream& in, float* data, Eigen::Index n) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw ValidationError("truncated weights file");
}

}  // namespace

void Denoiser::save(const std::filesystem::path& path) const {
  const nlohmann::json header = {
      {"version", 1},
      {"arch", {arch_.input, arch_.hidden, arch_.bottleneck, arch_.hidden, arch_.input}},
      {"time_features", arch_.time_features},
      {"T", sched_.T},
      {"beta_min", sched_.beta_min},
      {"beta_max", sched_.beta_max},
      {"data_mean", data_mean_},
      {"data_variance", data_variance_},
      {"loss_history", loss_history}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* m : {&w_in_, &w_time_, &w_h_, &w_up_, &w_out_}) write_tensor(out, m->data(), m->size());
  for (const auto* v : {&b_in_, &b_h_, &b_up_, &b_out_}) write_tensor(out, v->data(), v->size());
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Denoiser Denoiser::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("no weights file at " + path.string());
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1u << 24)) throw ValidationError("corrupt weights header");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ValidationError("corrupt weights header");
  const auto header = nlohmann::json::parse(text);
  if (header.at("version").get<int>() != 1) throw ValidationError("unsupported weights version");
  const auto layers = header.at("arch").get<std::vector<int>>();
  if (layers.size() != 5 || layers[0] != layers[4] || layers[1] != layers[3])
    throw ValidationError("unsupported architecture");
  DenoiserArch arch{layers[0], layers[1], layers[2], header.at("time_features").get<int>()};
  const auto sched = NoiseSchedule::linear(header.at("T").get<int>(), header.at("beta_min").get<double>(),
                                           header.at("beta_max").get<double>());
  Denoiser den(sched, arch, 0);
  den.set_data_stats(header.at("data_mean").get<double>(), header.at("data_variance").get<double>());
  den.loss_history = header.at("loss_history").get<std::vector<double>>();
  for (auto* m : {&den.w_in_, &den.w_time_, &den.w_h_, &den.w_up_, &den.w_out_}) read_tensor(in, m->data(), m->size());
  for (auto* v : {&den.b_in_, &den.b_h_, &den.b_up_, &den.b_out_}) read_tensor(in, v->data(), v->size());
  return den;
}

}  // namespace colorwai::diffgen
