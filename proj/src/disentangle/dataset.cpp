#include <algorithm>
#include <cstring>

#include "colorwai/disentangle.hpp"
#include "colorwai/error.hpp"
#include "colorwai/hash.hpp"
#include "colorwai/rng.hpp"

namespace colorwai::disentangle {

bool LatentDataset::operator==(const LatentDataset& o) const {
  return codes.rows() == o.codes.rows() && codes.cols() == o.codes.cols() && codes == o.codes &&
         color_ids == o.color_ids && sample_seeds == o.sample_seeds && space_tag == o.space_tag &&
         backend_id == o.backend_id && codebook_version == o.codebook_version && seed == o.seed &&
         absent_colors == o.absent_colors;
}

std::string LatentDataset::hash() const {
  std::string bytes;
  bytes.reserve(static_cast<std::size_t>(codes.size()) * sizeof(double) + color_ids.size() * sizeof(int) + 64);
  bytes.append(space_tag).push_back('\0');
  const auto rows = static_cast<std::uint64_t>(codes.rows());
  const auto cols = static_cast<std::uint64_t>(codes.cols());
  bytes.append(reinterpret_cast<const char*>(&rows), sizeof rows);
  bytes.append(reinterpret_cast<const char*>(&cols), sizeof cols);
  bytes.append(reinterpret_cast<const char*>(codes.data()), static_cast<std::size_t>(codes.size()) * sizeof(double));
  bytes.append(reinterpret_cast<const char*>(color_ids.data()), color_ids.size() * sizeof(int));
  return sha256_hex(bytes);
}

numerics::LabeledLatentSet LatentDataset::one_vs_rest(int color_id) const {
  numerics::LabeledLatentSet set;
  set.codes = codes;
  set.space_tag = space_tag;
  set.labels.reserve(color_ids.size());
  for (int id : color_ids) set.labels.push_back(id == color_id ? 1 : 0);
  return set;
}

LatentDataset couple(const EditBackend& backend, const colorlab::ColorCodebook& book,
                     const colorlab::AnnotationConfig& annotation, std::size_t n, std::uint64_t seed) {
  if (book.entries.empty()) throw ValidationError("empty codebook");
  if (n == 0) throw ValidationError("coupling needs at least one sample");
  LatentDataset data;
  data.space_tag = backend.space_tag();
  data.backend_id = backend.id();
  data.codebook_version = book.version;
  data.seed = seed;
  data.codes.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(backend.latent_dim()));
  std::vector<std::size_t> counts(book.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = mix_seed(seed, i);
    const auto sample = backend.couple_sample(s);
    if (static_cast<std::size_t>(sample.code.size()) != backend.latent_dim())
      throw std::runtime_error("backend returned a code of the wrong dimension");
    data.codes.row(static_cast<Eigen::Index>(i)) = sample.code.transpose();
    const int id = colorlab::annotate_main_color(sample.image, book, annotation);
    data.color_ids.push_back(id);
    data.sample_seeds.push_back(s);
    ++counts[static_cast<std::size_t>(id)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] == 0) data.absent_colors.push_back(static_cast<int>(c));
  return data;
}

void to_json(nlohmann::json& j, const LatentDataset& d) {
  j = {{"version", 1},
       {"backend", d.backend_id},
       {"space_tag", d.space_tag},
       {"codebook_version", d.codebook_version},
       {"seed", d.seed},
       {"n", d.size()},
       {"dim", d.dim()},
       {"hash", d.hash()},
       {"color_ids", d.color_ids},
       {"sample_seeds", d.sample_seeds},
       {"absent_colors", d.absent_colors},
       {"codes", std::vector<double>(d.codes.data(), d.codes.data() + d.codes.size())}};
}

void from_json(const nlohmann::json& j, LatentDataset& d) {
  d = LatentDataset{};
  d.backend_id = j.at("backend").get<std::string>();
  d.space_tag = j.at("space_tag").get<std::string>();
  d.codebook_version = j.at("codebook_version").get<int>();
  d.seed = j.at("seed").get<std::uint64_t>();
  d.color_ids = j.at("color_ids").get<std::vector<int>>();
  d.sample_seeds = j.at("sample_seeds").get<std::vector<std::uint64_t>>();
  d.absent_colors = j.at("absent_colors").get<std::vector<int>>();
  const auto n = j.at("n").get<Eigen::Index>();
  const auto dim = j.at("dim").get<Eigen::Index>();
  const auto values = j.at("codes").get<std::vector<double>>();
  if (static_cast<std::size_t>(n) != d.color_ids.size() || static_cast<Eigen::Index>(values.size()) != n * dim)
    throw ValidationError("dataset shape mismatch");
  d.codes = Eigen::Map<const numerics::Matrix>(values.data(), n, dim);
}

}  // namespace colorwai::disentangle
