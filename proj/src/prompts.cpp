#include "facver/prompts.hpp"

#include <algorithm>
#include <cstdlib>

#include "facver/errors.hpp"
#include "facver/util.hpp"

namespace facver {

PromptCatalog::PromptCatalog(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) {
    throw ConfigError("prompt directory not found: " + dir_.string());
  }
}

std::filesystem::path PromptCatalog::default_dir() {
  if (const char* env = std::getenv("FACVER_PROMPTS_DIR"); env && *env) return env;
  return "prompts";
}

void PromptCatalog::load(const std::string& name) const {
  if (cache_.count(name)) return;
  std::filesystem::path path = dir_ / (name + ".txt");
  if (!std::filesystem::exists(path)) {
    throw ConfigError("prompt template not found: " + path.string());
  }
  std::string raw = read_text_file(path);

  // Strip the attribution/comment header: leading lines starting with '#'.
  std::size_t pos = 0;
  while (pos < raw.size() && raw[pos] == '#') {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string::npos) {
      pos = raw.size();
      break;
    }
    pos = nl + 1;
  }
  std::string body = raw.substr(pos);
  // The file ends with one newline (editor convention); the template does not.
  if (!body.empty() && body.back() == '\n') body.pop_back();
  cache_[name] = std::move(body);
}

const std::string& PromptCatalog::text(const std::string& name) const {
  load(name);
  return cache_.at(name);
}

std::string PromptCatalog::digest(const std::string& name) const {
  return sha256_hex(text(name));
}

std::vector<std::string> PromptCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".txt") out.push_back(entry.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string render_template(const std::string& templ,
                            const std::map<std::string, std::string>& substitutions) {
  std::string out = templ;
  for (const auto& [key, value] : substitutions) {
    out = replace_all(std::move(out), "[" + key + "]", value);
  }
  return out;
}

}  // namespace facver
