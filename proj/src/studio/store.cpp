#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include "colorwai/error.hpp"
#include "colorwai/hash.hpp"
#include "colorwai/store.hpp"

namespace colorwai::studio {
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("missing " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_hex_digest(const std::string& s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

}  // namespace

void atomic_write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const fs::path tmp =
      path.string() + "." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

WorkspaceStore::WorkspaceStore(fs::path root) : root_(std::move(root)) {
  for (const char* dir : {"directions", "patterns", "blobs", "boards", "reports", "journal", "datasets", "diffusion"})
    fs::create_directories(root_ / dir);
  replay();
}

fs::path WorkspaceStore::resolve(const std::string& rel) const {
  const fs::path p(rel);
  if (rel.empty() || p.is_absolute()) throw ValidationError("invalid document path: " + rel);
  for (const auto& part : p) {
    if (part == "..") throw ValidationError("invalid document path: " + rel);
  }
  return root_ / p;
}

bool WorkspaceStore::exists(const std::string& rel) const { return fs::exists(resolve(rel)); }

nlohmann::json WorkspaceStore::read(const std::string& rel) const {
  const auto path = resolve(rel);
  if (!fs::exists(path)) throw NotFoundError("no document " + rel);
  return nlohmann::json::parse(slurp(path));
}

std::optional<nlohmann::json> WorkspaceStore::try_read(const std::string& rel) const {
  const auto path = resolve(rel);
  if (!fs::exists(path)) return std::nullopt;
  return nlohmann::json::parse(slurp(path));
}

std::vector<std::string> WorkspaceStore::list(const std::string& dir) const {
  std::vector<std::string> out;
  const auto base = resolve(dir);
  if (!fs::is_directory(base)) return out;
  for (const auto& entry : fs::directory_iterator(base)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      out.push_back((fs::path(dir) / entry.path().filename()).generic_string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void WorkspaceStore::write(const std::string& rel, const nlohmann::json& doc) { write_batch({{rel, doc}}); }

void WorkspaceStore::maybe_crash(FaultPoint point) {
  if (fault_ == point) {
    fault_ = FaultPoint::none;
    throw SimulatedCrash();
  }
}

void WorkspaceStore::write_batch(const std::vector<std::pair<std::string, nlohmann::json>>& docs) {
  for (const auto& [rel, doc] : docs) {
    resolve(rel);
    if (!doc.is_object() || !doc.contains("version")) throw ValidationError("document without version: " + rel);
  }
  std::lock_guard lock(write_mutex_);
  nlohmann::json entry = {{"writes", nlohmann::json::array()}};
  for (const auto& [rel, doc] : docs) entry["writes"].push_back({{"path", rel}, {"doc", doc}});

  const std::string tx = std::to_string(next_tx_++);
  const fs::path journal = root_ / "journal";
  atomic_write_file(journal / (tx + ".json"), entry.dump());
  maybe_crash(FaultPoint::after_journal_write);
  atomic_write_file(journal / (tx + ".commit"), "ok");
  maybe_crash(FaultPoint::after_commit_marker);
  std::size_t applied = 0;
  for (const auto& [rel, doc] : docs) {
    atomic_write_file(resolve(rel), doc.dump(2));
    if (++applied == 1 && docs.size() > 1) maybe_crash(FaultPoint::mid_apply);
  }
  if (docs.size() == 1) maybe_crash(FaultPoint::mid_apply);
  fs::remove(journal / (tx + ".commit"));
  fs::remove(journal / (tx + ".json"));
}

void WorkspaceStore::replay() {
  const fs::path journal = root_ / "journal";
  std::vector<std::pair<std::uint64_t, fs::path>> entries;
  for (const auto& e : fs::directory_iterator(journal)) {
    const auto& p = e.path();
    if (p.extension() == ".tmp") {
      fs::remove(p);
      continue;
    }
    if (p.extension() != ".json") continue;
    try {
      entries.emplace_back(std::stoull(p.stem().string()), p);
    } catch (const std::exception&) {
      fs::remove(p);
    }
  }
  std::sort(entries.begin(), entries.end());
  for (const auto& [id, path] : entries) {
    const fs::path marker = journal / (std::to_string(id) + ".commit");
    if (fs::exists(marker)) {
      const auto entry = nlohmann::json::parse(slurp(path));
      for (const auto& w : entry.at("writes"))
        atomic_write_file(resolve(w.at("path").get<std::string>()), w.at("doc").dump(2));
      fs::remove(marker);
    }
    fs::remove(path);
  }
  // Stray markers without a batch carry nothing to apply.
  for (const auto& e : fs::directory_iterator(journal)) {
    if (e.path().extension() == ".commit") fs::remove(e.path());
  }
  // Leftover temporaries from interrupted document writes.
  for (const auto& e : fs::recursive_directory_iterator(root_)) {
    if (e.is_regular_file() && e.path().extension() == ".tmp") fs::remove(e.path());
  }
  next_tx_ = entries.empty() ? 0 : entries.back().first + 1;
}

std::string WorkspaceStore::put_blob(const std::vector<std::uint8_t>& bytes) {
  const auto hash = sha256_hex(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  const auto path = blob_path(hash);
  if (!fs::exists(path)) atomic_write_file(path, std::string(bytes.begin(), bytes.end()));
  return hash;
}

std::filesystem::path WorkspaceStore::blob_path(const std::string& hash) const {
  if (!is_hex_digest(hash)) throw ValidationError("invalid blob hash");
  return root_ / "blobs" / (hash + ".png");
}

bool WorkspaceStore::has_blob(const std::string& hash) const { return fs::exists(blob_path(hash)); }

std::vector<std::uint8_t> WorkspaceStore::get_blob(const std::string& hash) const {
  const auto path = blob_path(hash);
  if (!fs::exists(path)) throw NotFoundError("no blob " + hash);
  const auto text = slurp(path);
  return {text.begin(), text.end()};
}

}  // namespace colorwai::studio
