#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace facver {

// Loads prompt templates from a directory of .txt files. Lines starting with
// '#' at the top of a file are attribution/source comments and are stripped;
// everything after the first non-comment line is template text, verbatim.
// Templates use [placeholder] substitution tokens.
class PromptCatalog {
 public:
  explicit PromptCatalog(std::filesystem::path dir = default_dir());

  // Template body with comment header removed. Throws ConfigError if missing.
  const std::string& text(const std::string& name) const;

  // SHA-256 hex digest of the loaded (stripped) template body.
  std::string digest(const std::string& name) const;

  std::vector<std::string> names() const;
  const std::filesystem::path& dir() const { return dir_; }

  // FACVER_PROMPTS_DIR environment variable, else "prompts" relative to cwd.
  static std::filesystem::path default_dir();

 private:
  void load(const std::string& name) const;
  std::filesystem::path dir_;
  mutable std::map<std::string, std::string> cache_;
};

// Replaces every [key] occurrence with its value. Unknown placeholders are
// left intact (templates legitimately contain literal bracketed text such as
// format instructions).
std::string render_template(const std::string& templ,
                            const std::map<std::string, std::string>& substitutions);

}  // namespace facver
