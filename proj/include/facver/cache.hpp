#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace facver {

struct CompletionRequest;
struct CompletionResponse;

// Content-addressed on-disk cache for completion responses. Entries live at
// <dir>/<first two hex chars of key>/<key>.json and are written atomically
// (temp file + rename) so concurrent writers never expose partial JSON.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<CompletionResponse> lookup(const std::string& key) const;
  void store(const std::string& key, const CompletionRequest& request,
             const CompletionResponse& response);

  const std::filesystem::path& dir() const { return dir_; }

  // Resolution order for the cache directory: explicit argument, then the
  // FACVER_CACHE_DIR environment variable, then ".facver_cache".
  static std::filesystem::path resolve_dir(const std::optional<std::string>& explicit_dir);

 private:
  std::filesystem::path entry_path(const std::string& key) const;
  std::filesystem::path dir_;
};

}  // namespace facver
