#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace colorwai::studio {

/// Points inside a journaled write where a test can simulate a crash.
enum class FaultPoint { none, after_journal_write, after_commit_marker, mid_apply };

/// Thrown by the store when a fault point fires.
struct SimulatedCrash : std::runtime_error {
  SimulatedCrash() : std::runtime_error("simulated crash") {}
};

/// File-backed workspace. Documents are JSON files addressed by relative path;
/// images are content-addressed PNG blobs. Multi-document writes go through a
/// write-ahead journal: the batch is written, then a commit marker, then the
/// files are replaced one by one. Opening a store replays committed batches
/// and drops uncommitted ones.
class WorkspaceStore {
 public:
  explicit WorkspaceStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  bool exists(const std::string& rel) const;
  nlohmann::json read(const std::string& rel) const;
  std::optional<nlohmann::json> try_read(const std::string& rel) const;
  /// Relative paths of the *.json documents directly under `dir`, sorted.
  std::vector<std::string> list(const std::string& dir) const;

  void write(const std::string& rel, const nlohmann::json& doc);
  /// Atomically replaces every listed document.
  void write_batch(const std::vector<std::pair<std::string, nlohmann::json>>& docs);

  /// Stores bytes under their SHA-256 and returns the hex digest.
  std::string put_blob(const std::vector<std::uint8_t>& bytes);
  std::vector<std::uint8_t> get_blob(const std::string& hash) const;
  bool has_blob(const std::string& hash) const;
  std::filesystem::path blob_path(const std::string& hash) const;

  /// Test hook: the next journaled write throws SimulatedCrash at `point`.
  void inject_fault(FaultPoint point) { fault_ = point; }

 private:
  std::filesystem::path resolve(const std::string& rel) const;
  void replay();
  void maybe_crash(FaultPoint point);

  std::filesystem::path root_;
  std::mutex write_mutex_;
  FaultPoint fault_ = FaultPoint::none;
  std::uint64_t next_tx_ = 0;
};

/// Writes `text` to `path` through a temporary file and rename.
void atomic_write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace colorwai::studio
