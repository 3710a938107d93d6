#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "colorwai/backends.hpp"
#include "colorwai/error.hpp"
#include "colorwai/http.hpp"
#include "colorwai/png_io.hpp"
#include "colorwai/rng.hpp"
#include "colorwai/runtime.hpp"

// After Eigen: resolv.h, pulled in here, defines a _res macro.
#include <httplib.h>

namespace colorwai::cli {
namespace fs = std::filesystem;
using nlohmann::json;
using studio::Runtime;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

struct Options {
  std::string workspace = "workspace";
  bool verbose = false;

  struct {
    std::size_t n = 1000;
    std::uint64_t seed = 11;
    int resolution = 64;
    std::uint64_t mapping_seed = 7;
    std::string out;
  } corpus;

  struct {
    std::string corpus;
    int k = 19;
  } codebook;

  struct {
    std::size_t n = 1000;
    std::uint64_t seed = 3;
    int epochs = 50;
    int batch = 32;
    double lr = 1e-3;
  } train;

  struct {
    std::string backend = "texgen";
    std::size_t n = 1000;
    std::uint64_t seed = 1;
  } couple;

  struct {
    std::string backend = "texgen";
    std::string method = "shapleyvec";
    double explanation = 0.5;
    int k = 40;
    double c_reg = 0.1;
    std::string loss = "logistic";
    std::uint64_t seed = 0;
    bool eval = false;
  } fit;

  struct {
    std::string backend = "texgen";
    std::string method = "shapleyvec";
    int samples = 100;
    int alpha_samples = 32;
    double ssim_ratio = 0.75;
    double alpha_max = 3.0;
    double alpha_step = 0.05;
    std::uint64_t seed = 2024;
  } eval;

  struct {
    std::string backend = "texgen";
    std::string method = "shapleyvec";
  } report;

  struct {
    std::string host = "127.0.0.1";
    int port = 8080;
  } serve;

  struct {
    std::string id;
    std::string out;
  } board;
};

studio::StudioConfig studio_config(const Options& o) {
  studio::StudioConfig cfg;
  cfg.eval.n_alpha_samples = o.eval.alpha_samples;
  cfg.eval.m_eval_samples = o.eval.samples;
  cfg.eval.ssim_ratio = o.eval.ssim_ratio;
  cfg.eval.alpha_max = o.eval.alpha_max;
  cfg.eval.alpha_step = o.eval.alpha_step;
  cfg.eval.seed = o.eval.seed;
  cfg.eval.validate();
  return cfg;
}

Runtime open(const Options& o) { return studio::open_runtime(o.workspace, studio_config(o)); }

int gen_corpus(const Options& o) {
  if (o.corpus.n == 0) throw ValidationError("--n must be positive");
  studio::WorkspaceStore store(o.workspace);
  texgen::GeneratorConfig gc;
  gc.mapping_seed = o.corpus.mapping_seed;
  gc.resolution = o.corpus.resolution;
  const texgen::ProceduralGenerator gen(gc);
  store.write("generator.json", gc);
  const fs::path dir = o.corpus.out.empty() ? fs::path(o.workspace) / "corpus" : fs::path(o.corpus.out);
  fs::create_directories(dir);
  std::string manifest = "filename,seed,color_id\n";
  for (std::size_t i = 0; i < o.corpus.n; ++i) {
    const auto seed = mix_seed(o.corpus.seed, i);
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.png", i);
    write_png(dir / name, gen.synthesize(gen.sample_latent(seed)));
    manifest += std::string(name) + "," + std::to_string(seed) + ",\n";
  }
  write_text(dir / "manifest.csv", manifest);
  std::cout << "wrote " << o.corpus.n << " images to " << dir.string() << "\n";
  return 0;
}

int build_codebook(const Options& o) {
  auto rt = open(o);
  const fs::path dir = o.codebook.corpus.empty() ? fs::path(o.workspace) / "corpus" : fs::path(o.codebook.corpus);
  const auto lines = read_lines(dir / "manifest.csv");
  if (lines.size() < 2) throw ValidationError("empty corpus manifest");
  const auto& ann = rt.studio->config().annotation;
  std::vector<ImageBuffer> images;
  std::vector<colorlab::Palette> palettes;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto file = lines[i].substr(0, lines[i].find(','));
    images.push_back(read_png(dir / file));
    palettes.push_back(colorlab::extract_palette(images.back(), ann));
  }
  const auto book = colorlab::build_codebook(palettes, o.codebook.k);
  rt.studio->save_codebook(book);
  std::string manifest = lines[0] + "\n";
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const auto cut = line.find(',', line.find(',') + 1);
    manifest += line.substr(0, cut) + "," +
                std::to_string(colorlab::annotate_main_color(images[i - 1], book, ann)) + "\n";
  }
  write_text(dir / "manifest.csv", manifest);
  for (const auto& e : book.entries)
    std::cout << e.id << "\t" << e.name << "\th=" << e.hsv.h << " s=" << e.hsv.s << " v=" << e.hsv.v << "\n";
  return 0;
}

int train_diffusion(const Options& o) {
  studio::WorkspaceStore store(o.workspace);
  const texgen::ProceduralGenerator gen(studio::load_generator_config(store));
  if (o.train.n == 0) throw ValidationError("--n must be positive");
  const auto corpus = studio::diffusion_corpus(gen, o.train.n, o.train.seed);
  diffgen::TrainConfig tc;
  tc.epochs = o.train.epochs;
  tc.batch_size = o.train.batch;
  tc.learning_rate = o.train.lr;
  tc.seed = o.train.seed;
  const auto den = diffgen::train_denoiser(corpus, diffgen::NoiseSchedule::linear(), tc);
  const auto path = studio::denoiser_path(o.workspace);
  den.save(path);
  std::cout << "final loss " << den.loss_history.back() << ", weights at " << path.string() << "\n";
  return 0;
}

int couple(const Options& o) {
  auto rt = open(o);
  const auto data = rt.studio->couple(o.couple.backend, o.couple.n, o.couple.seed);
  std::vector<int> counts(rt.studio->codebook().size(), 0);
  for (int c : data.color_ids) ++counts[static_cast<std::size_t>(c)];
  json j = {{"backend", data.backend_id}, {"n", data.size()}, {"space_tag", data.space_tag},
            {"counts", counts},            {"absent_colors", data.absent_colors}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int fit(const Options& o) {
  auto rt = open(o);
  studio::FitRequest req;
  req.backend = o.fit.backend;
  req.method = disentangle::parse_method(o.fit.method);
  req.hyperparams.explanation = o.fit.explanation;
  req.hyperparams.k = o.fit.k;
  req.hyperparams.c_reg = o.fit.c_reg;
  req.hyperparams.kind = numerics::parse_loss_kind(o.fit.loss);
  req.seed = o.fit.seed;
  req.evaluate = o.fit.eval;
  const auto set = rt.studio->fit(req);
  std::cout << "fitted " << set.directions.size() << " directions, version " << set.version << "\n";
  for (const auto& m : set.missing) std::cout << "missing color " << m.color_id << ": " << m.reason << "\n";
  return 0;
}

int eval(const Options& o) {
  auto rt = open(o);
  const auto report = rt.studio->evaluate(o.eval.backend, disentangle::parse_method(o.eval.method));
  const auto stem = fs::path(o.workspace) / "reports" / (o.eval.backend + "-" + report.method);
  write_text(stem.string() + "-rows.csv", evalkit::rows_csv(report));
  std::cout << evalkit::rows_csv(report);
  std::cout << "p-acc mean " << report.p_acc.mean << " (" << report.p_acc.count << " colors), relaxed mean "
            << report.relaxed_acc.mean << ", ssim violations " << report.ssim_guard.violations << "\n";
  return 0;
}

int report(const Options& o) {
  auto rt = open(o);
  const auto method = disentangle::parse_method(o.report.method);
  const auto set = rt.studio->directions(o.report.backend, method);
  if (!set) throw ValidationError("directions not fitted");
  const auto rep = evalkit::representation_report(*set);
  const auto stem = fs::path(o.workspace) / "reports" /
                    (o.report.backend + "-" + o.report.method + "-v" + std::to_string(set->version));
  rt.store->write("reports/" + stem.filename().string() + "-representation.json", rep);
  write_text(stem.string() + "-cosine.csv", evalkit::matrix_csv(rep.cosine));
  write_text(stem.string() + "-overlap.csv", evalkit::matrix_csv(rep.overlap));
  const auto eval_doc = rt.store->try_read("reports/" + stem.filename().string() + ".json");
  if (eval_doc) {
    write_text(stem.string() + "-confusion.csv", evalkit::matrix_csv(eval_doc->get<evalkit::EvalReport>().confusion));
  } else {
    std::cerr << "no evaluation for this version; run eval first for the confusion matrix\n";
  }
  std::cout << "wrote " << stem.string() << "-*.csv\n";
  return 0;
}

int serve(const Options& o) {
  auto rt = open(o);
  httplib::Server server;
  studio::install_routes(server, *rt.studio);
  spdlog::info("serving {} on http://{}:{}", o.workspace, o.serve.host, o.serve.port);
  if (!server.listen(o.serve.host, o.serve.port)) throw std::runtime_error("cannot listen on port " + std::to_string(o.serve.port));
  return 0;
}

int export_board(const Options& o) {
  auto rt = open(o);
  const auto board = rt.studio->load_board(o.board.id);
  const fs::path out = o.board.out.empty() ? fs::path(o.workspace) / "exports" / (board.id + ".png") : fs::path(o.board.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_png(out, rt.studio->export_board(board.id));
  json doc = board;
  doc["patterns"] = json::array();
  for (const auto& item : board.pinned) doc["patterns"].push_back(rt.studio->pattern(item.pattern_id));
  auto json_path = out;
  json_path.replace_extension(".json");
  write_text(json_path, doc.dump(2));
  std::cout << "wrote " << out.string() << " and " << json_path.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  Options o;
  CLI::App app{"colorwai: colorway generation by latent direction editing"};
  app.require_subcommand(1);
  app.set_config("--config", "colorwai.toml", "Defaults file (key = value)");
  app.add_option("-w,--workspace", o.workspace, "Workspace root")->envname("COLORWAI_WORKSPACE")->capture_default_str();
  app.add_flag("-v,--verbose", o.verbose, "Debug logging");

  auto* c = app.add_subcommand("gen-corpus", "Render a texgen corpus with a manifest");
  c->add_option("--n", o.corpus.n, "Number of images")->capture_default_str();
  c->add_option("--seed", o.corpus.seed, "Latent seed")->capture_default_str();
  c->add_option("--resolution", o.corpus.resolution, "Image side")->capture_default_str();
  c->add_option("--mapping-seed", o.corpus.mapping_seed, "Generator mapping seed")->capture_default_str();
  c->add_option("--out", o.corpus.out, "Output directory (default <workspace>/corpus)");

  auto* b = app.add_subcommand("build-codebook", "Cluster corpus palettes into the color codebook");
  b->add_option("--corpus", o.codebook.corpus, "Corpus directory (default <workspace>/corpus)");
  b->add_option("--k", o.codebook.k, "Number of colors")->capture_default_str();

  auto* t = app.add_subcommand("train-diffusion", "Train the diffusion backend's denoiser");
  t->add_option("--n", o.train.n, "Corpus size")->capture_default_str();
  t->add_option("--seed", o.train.seed, "Corpus and training seed")->capture_default_str();
  t->add_option("--epochs", o.train.epochs)->capture_default_str();
  t->add_option("--batch", o.train.batch)->capture_default_str();
  t->add_option("--lr", o.train.lr)->capture_default_str();

  auto* cp = app.add_subcommand("couple", "Annotate seeded latent codes with their main color");
  cp->add_option("--backend", o.couple.backend)->capture_default_str();
  cp->add_option("--n", o.couple.n)->capture_default_str();
  cp->add_option("--seed", o.couple.seed)->capture_default_str();

  auto* f = app.add_subcommand("fit", "Fit one direction per codebook color");
  f->add_option("--backend", o.fit.backend)->capture_default_str();
  f->add_option("--method", o.fit.method)
      ->check(CLI::IsMember({"interfacegan", "stylespace", "shapleyvec"}))
      ->capture_default_str();
  f->add_option("-E,--explanation", o.fit.explanation, "ShapleyVec explanation level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  f->add_option("-k,--k", o.fit.k, "StyleSpace dimensions kept")->check(CLI::PositiveNumber)->capture_default_str();
  f->add_option("-C,--c-reg", o.fit.c_reg, "Classifier regularization")->check(CLI::PositiveNumber)->capture_default_str();
  f->add_option("--loss", o.fit.loss)->check(CLI::IsMember({"logistic", "hinge"}))->capture_default_str();
  f->add_option("--seed", o.fit.seed)->capture_default_str();
  f->add_flag("--eval", o.fit.eval, "Evaluate right away so alpha_optimal is stored");

  auto* e = app.add_subcommand("eval", "Score the latest direction set and store alpha_optimal");
  e->add_option("--backend", o.eval.backend)->capture_default_str();
  e->add_option("--method", o.eval.method)->capture_default_str();
  e->add_option("--samples", o.eval.samples, "Evaluation pool size")->capture_default_str();
  e->add_option("--alpha-samples", o.eval.alpha_samples, "Samples for alpha_optimal")->capture_default_str();
  e->add_option("--ssim-ratio", o.eval.ssim_ratio)->capture_default_str();
  e->add_option("--alpha-max", o.eval.alpha_max)->capture_default_str();
  e->add_option("--alpha-step", o.eval.alpha_step)->capture_default_str();
  e->add_option("--seed", o.eval.seed)->capture_default_str();

  auto* r = app.add_subcommand("report", "Write representation and confusion CSVs");
  r->add_option("--backend", o.report.backend)->capture_default_str();
  r->add_option("--method", o.report.method)->capture_default_str();

  auto* s = app.add_subcommand("serve", "Run the HTTP service");
  s->add_option("--host", o.serve.host)->capture_default_str();
  s->add_option("--port", o.serve.port)->capture_default_str();

  auto* x = app.add_subcommand("export-board", "Write a board as PNG contact sheet plus JSON");
  x->add_option("--id", o.board.id)->required();
  x->add_option("--out", o.board.out, "PNG path (default <workspace>/exports/<id>.png)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    std::cerr << app.help();
    return 2;
  }
  spdlog::set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*c) return gen_corpus(o);
    if (*b) return build_codebook(o);
    if (*t) return train_diffusion(o);
    if (*cp) return couple(o);
    if (*f) return fit(o);
    if (*e) return eval(o);
    if (*r) return report(o);
    if (*s) return serve(o);
    if (*x) return export_board(o);
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const NotFoundError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "internal error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace colorwai::cli
