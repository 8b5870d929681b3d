#include "facver/papers.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <regex>
#include <set>

#include "facver/decompose.hpp"
#include "facver/errors.hpp"
#include "facver/probability.hpp"
#include "facver/util.hpp"

namespace facver::papers {

namespace {

using nlohmann::json;

std::string id_as_string(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw IngestionError("query_id must be a string or integer");
}

const std::string kPaperBlock = "Paper [number]: [reference]\n\nTitle: [title]\n\nAbstract: [abstract]";

std::string splice_block(const std::string& templ, const std::string& block,
                         const std::string& replacement, const std::string& name) {
  std::size_t at = templ.find(block);
  if (at == std::string::npos) {
    throw ConfigError(name + " template is missing its paper block");
  }
  std::string out = templ;
  out.replace(at, block.size(), replacement);
  return out;
}

}  // namespace

QueryItem query_item_from_json_line(const std::string& line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw IngestionError("line " + std::to_string(line_number) + ": invalid JSON: " + e.what());
  }
  auto fail = [&](const std::string& what) {
    throw IngestionError("line " + std::to_string(line_number) + ": " + what);
  };

  QueryItem item;
  if (!j.contains("query_id")) fail("missing query_id");
  item.query_id = id_as_string(j["query_id"]);
  if (!j.contains("question") || !j["question"].is_string()) fail("missing question");
  item.question = j["question"].get<std::string>();
  if (!j.contains("papers") || !j["papers"].is_array() || j["papers"].empty()) {
    fail("record " + item.query_id + " has no papers");
  }

  std::set<std::string> seen_refs;
  int index = 0;
  for (const auto& p : j["papers"]) {
    PaperAbstract paper;
    paper.paper_index = ++index;
    paper.reference = p.value("reference", "");
    paper.title = p.value("title", "");
    paper.abstract = p.value("abstract", "");
    if (paper.reference.empty() || paper.abstract.empty()) {
      fail("record " + item.query_id + ", paper " + std::to_string(index) +
           ": reference and abstract are required");
    }
    if (!seen_refs.insert(to_lower(paper.reference)).second) {
      fail("record " + item.query_id + ": duplicate reference \"" + paper.reference + "\"");
    }
    item.abstracts.push_back(std::move(paper));
  }
  return item;
}

std::vector<QueryItem> load_query_dataset(const std::filesystem::path& path) {
  std::string content = read_text_file(path);
  std::vector<QueryItem> items;
  std::size_t line_number = 0;
  for (const std::string& line : split_lines(content)) {
    ++line_number;
    if (trim(line).empty()) continue;
    items.push_back(query_item_from_json_line(line, line_number));
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const QueryItem& a, const QueryItem& b) { return a.query_id < b.query_id; });
  return items;
}

std::vector<CitationRef> parse_citations(const std::string& sentence) {
  // Name (YYYY) | Name et al. (YYYY) | Name and Name (YYYY) | Name & Name (YYYY)
  static const std::regex pattern(
      R"(([A-Z][A-Za-z'\-]*)(\s+et\s+al\.|\s+(?:and|&)\s+[A-Z][A-Za-z'\-]*)?\s*\((\d{4})\))");

  std::vector<CitationRef> out;
  std::set<std::pair<std::string, int>> seen;
  for (std::sregex_iterator it(sentence.begin(), sentence.end(), pattern), end; it != end; ++it) {
    int year = std::stoi((*it)[3].str());
    if (year < 1800 || year > 2100) continue;
    CitationRef ref;
    ref.author_token = (*it)[1].str();
    ref.year = year;
    ref.raw = it->str();
    if (seen.insert({to_lower(ref.author_token), year}).second) out.push_back(std::move(ref));
  }
  return out;
}

std::vector<Claim> split_cited_claims(const std::string& summary) {
  std::vector<Claim> claims = decompose_sentences(summary);
  for (Claim& claim : claims) claim.citations = parse_citations(claim.text);
  return claims;
}

std::vector<Claim> select_checkable(const std::vector<Claim>& claims) {
  std::vector<Claim> out;
  for (const Claim& claim : claims) {
    if (!claim.citations.empty()) out.push_back(claim);
  }
  return out;
}

std::vector<SourceDocument> gather_sources(const Claim& claim, const QueryItem& item) {
  // Sentence-derived claims arrive without the citations field populated;
  // fall back to parsing the claim text. Uncited claims yield no sources.
  std::vector<CitationRef> parsed;
  const std::vector<CitationRef>* citations = &claim.citations;
  if (citations->empty()) {
    parsed = parse_citations(claim.text);
    citations = &parsed;
  }
  std::vector<SourceDocument> sources;
  std::set<int> used;
  for (const CitationRef& citation : *citations) {
    const PaperAbstract* match = nullptr;
    for (const PaperAbstract& paper : item.abstracts) {
      if (!istarts_with(paper.reference, citation.author_token)) continue;
      std::vector<CitationRef> ref_citation = parse_citations(paper.reference);
      if (ref_citation.empty() || ref_citation.front().year != citation.year) continue;
      match = &paper;
      break;
    }
    if (!match) {
      throw DanglingCitationError("citation \"" + citation.raw + "\" matches no provided paper (" +
                                  "item " + item.query_id + ")");
    }
    if (used.insert(match->paper_index).second) sources.push_back(match->to_source());
  }
  return sources;
}

std::string papers_block(const std::vector<PaperAbstract>& abstracts) {
  std::string out;
  for (std::size_t i = 0; i < abstracts.size(); ++i) {
    if (i) out += "\n\n";
    out += render_template(kPaperBlock, {{"number", std::to_string(abstracts[i].paper_index)},
                                         {"reference", abstracts[i].reference},
                                         {"title", abstracts[i].title},
                                         {"abstract", abstracts[i].abstract}});
  }
  return out;
}

std::string build_generation_prompt(const QueryItem& item, const PromptCatalog& prompts) {
  std::string templ = splice_block(prompts.text("generate_summary"), kPaperBlock,
                                   papers_block(item.abstracts), "generate_summary");
  return render_template(templ, {{"question", item.question}});
}

GeneratedSummary generate_summary(const QueryItem& item, Gateway& gateway,
                                  const ModelSpec& summarizer, const PromptCatalog& prompts) {
  std::string prompt = build_generation_prompt(item, prompts);
  GeneratedSummary out;
  out.text = gateway.complete(make_request(summarizer, prompt)).text;
  if (trim(out.text).empty()) {
    out.warnings.push_back("item " + item.query_id + ": model produced an empty summary");
  }
  out.context.messages.push_back(Message{"user", std::move(prompt)});
  out.context.messages.push_back(Message{"assistant", out.text});
  return out;
}

SummaryVerdict evaluate_summary(const std::string& summary_id, const std::string& summary,
                                const QueryItem& item, Gateway& gateway, const ModelSpec& judge,
                                const PromptCatalog& prompts, int max_in_flight) {
  std::vector<Claim> checkable = select_checkable(split_cited_claims(summary));

  std::vector<std::string> warnings;
  if (checkable.empty()) {
    warnings.push_back("summary has no cited sentences; nothing was checkable");
  }

  std::vector<ClaimVerdict> verdicts(checkable.size());
  parallel_for(checkable.size(), max_in_flight, [&](std::size_t i) {
    const Claim& claim = checkable[i];
    try {
      std::vector<SourceDocument> sources = gather_sources(claim, item);
      Critique critique = critique_claim(claim, sources, gateway, judge, prompts);
      ClaimVerdict v = make_claim_verdict(claim.id, critique.supported ? 1.0 : 0.0,
                                          critique.critique_text, critique.revised_claim);
      verdicts[i] = std::move(v);
    } catch (const DanglingCitationError&) {
      ClaimVerdict v = make_claim_verdict(
          claim.id, 0.0, "The sentence cites a source that is not among the provided papers.");
      v.error_tag = "dangling_citation";
      verdicts[i] = std::move(v);
    }
  });

  return make_summary_verdict(summary_id, std::move(verdicts), Threshold::fixed(0.5),
                              std::move(warnings));
}

HallucinationStats aggregate_stats(std::span<const SummaryVerdict> verdicts,
                                   const std::string& model_label) {
  if (verdicts.empty()) throw DomainError("aggregate_stats needs at least one verdict");
  double total = 0.0;
  std::size_t with_reported = 0;
  for (const SummaryVerdict& v : verdicts) {
    total += v.reported_hallucination_count;
    if (v.reported_hallucination_count > 0) ++with_reported;
  }
  HallucinationStats stats;
  stats.model_label = model_label;
  stats.summaries_evaluated = verdicts.size();
  stats.reported_per_summary = total / static_cast<double>(verdicts.size());
  stats.adjusted_per_summary = adjust_rate(stats.reported_per_summary);
  stats.pct_with_reported =
      100.0 * static_cast<double>(with_reported) / static_cast<double>(verdicts.size());
  return stats;
}

std::vector<MatrixRow> run_interaction_matrix(const std::vector<QueryItem>& items,
                                              const std::vector<RoleConfig>& configs,
                                              Gateway& gateway, const PromptCatalog& prompts,
                                              const MatrixOptions& options) {
  // Summaries are generated once per summary model and shared across configs.
  // The memo is only populated on full success, so a failed generation run is
  // retried rather than reused half-empty.
  std::map<std::string, std::vector<GeneratedSummary>> summaries_by_model;

  auto model_key = [](const ModelSpec& m) {
    return to_string(m.provider) + "/" + m.model_name + "/" + std::to_string(m.temperature) + "/" +
           std::to_string(m.max_tokens);
  };

  std::vector<MatrixRow> rows;
  for (const RoleConfig& config : configs) {
    MatrixRow row;
    row.config = config;
    row.stats.model_label = config.key();

    try {
      std::string key = model_key(config.summary_model);
      auto found = summaries_by_model.find(key);
      if (found == summaries_by_model.end()) {
        std::vector<GeneratedSummary> fresh(items.size());
        parallel_for(items.size(), options.max_in_flight, [&](std::size_t i) {
          auto preset = options.preset_summaries.find(items[i].query_id);
          if (preset != options.preset_summaries.end()) {
            // Reused summary: no generation call, conversation reconstructed.
            fresh[i].text = preset->second;
            fresh[i].context.messages.push_back(
                Message{"user", build_generation_prompt(items[i], prompts)});
            fresh[i].context.messages.push_back(Message{"assistant", preset->second});
          } else {
            fresh[i] = generate_summary(items[i], gateway, config.summary_model, prompts);
          }
        });
        found = summaries_by_model.emplace(key, std::move(fresh)).first;
      }
      const std::vector<GeneratedSummary>* generated = &found->second;

      std::vector<std::optional<SummaryVerdict>> verdicts(items.size());
      std::vector<std::tuple<std::string, std::string, std::string>> revisions(items.size());
      std::vector<std::string> errors(items.size());

      parallel_for(items.size(), options.max_in_flight, [&](std::size_t i) {
        const QueryItem& item = items[i];
        try {
          const GeneratedSummary& gen = (*generated)[i];
          std::string text = gen.text;
          if (config.critique_model) {
            SourceResolver resolve = [&item](const Claim& claim) {
              return gather_sources(claim, item);
            };
            RevisionOutcome revised =
                revise_pipeline(text, resolve, gateway, *config.critique_model,
                                config.summary_model, prompts, gen.context, options.passes);
            revisions[i] = {item.query_id, text, revised.revised_summary};
            text = revised.revised_summary;
          }
          verdicts[i] = evaluate_summary(item.query_id, text, item, gateway, config.judge_model,
                                         prompts, /*max_in_flight=*/1);
        } catch (const std::exception& e) {
          errors[i] = "item " + item.query_id + ": " + e.what();
        }
      });

      for (std::size_t i = 0; i < items.size(); ++i) {
        if (verdicts[i]) {
          row.verdicts.push_back(std::move(*verdicts[i]));
          if (config.critique_model) row.revisions.push_back(std::move(revisions[i]));
        } else {
          ++row.items_failed;
          row.errors.push_back(std::move(errors[i]));
        }
      }
      if (!row.verdicts.empty()) {
        row.stats = aggregate_stats(row.verdicts, config.key());
      }
    } catch (const std::exception& e) {
      // Config-level failure (generation, configuration): row reports it and
      // the rest of the grid proceeds.
      ++row.items_failed;
      row.errors.push_back(e.what());
    }

    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sentence_diff(const std::string& original, const std::string& revised) {
  std::vector<std::string> a = split_sentences(original);
  std::vector<std::string> b = split_sentences(revised);

  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  std::string out;
  auto emit = [&out](const char* tag, const std::string& s) {
    out += tag;
    out += s;
    out += "\n";
  };
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (a[i] == b[j]) {
      emit("  ", a[i]);
      ++i, ++j;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      emit("- ", a[i]);
      ++i;
    } else {
      emit("+ ", b[j]);
      ++j;
    }
  }
  while (i < n) emit("- ", a[i++]);
  while (j < m) emit("+ ", b[j++]);
  return out;
}

void import_dataset(const std::filesystem::path& source, const std::filesystem::path& out_jsonl) {
  std::vector<json> records;

  auto push_record = [&records](const json& j, const std::string& origin) {
    json rec;
    if (j.contains("query_id")) {
      rec["query_id"] = j["query_id"];
    } else if (j.contains("id")) {
      rec["query_id"] = j["id"];
    } else {
      throw IngestionError(origin + ": record has neither query_id nor id");
    }
    if (j.contains("question")) {
      rec["question"] = j["question"];
    } else if (j.contains("query")) {
      rec["question"] = j["query"];
    } else {
      throw IngestionError(origin + ": record has neither question nor query");
    }
    const char* papers_field = j.contains("papers") ? "papers" : "abstracts";
    if (!j.contains(papers_field) || !j[papers_field].is_array()) {
      throw IngestionError(origin + ": record has no papers/abstracts array");
    }
    json papers = json::array();
    for (const auto& p : j[papers_field]) {
      json paper;
      paper["reference"] = p.value("reference", "");
      paper["title"] = p.value("title", "");
      paper["abstract"] = p.contains("abstract") ? p["abstract"] : json(p.value("text", ""));
      papers.push_back(std::move(paper));
    }
    rec["papers"] = std::move(papers);
    records.push_back(std::move(rec));
  };

  if (std::filesystem::is_directory(source)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(source)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      json j = json::parse(read_text_file(file));
      push_record(j, file.filename().string());
    }
  } else {
    json j = json::parse(read_text_file(source));
    if (!j.is_array()) throw IngestionError(source.string() + ": expected a JSON array of records");
    std::size_t index = 0;
    for (const auto& rec : j) push_record(rec, source.string() + "[" + std::to_string(index++) + "]");
  }

  std::stable_sort(records.begin(), records.end(), [](const json& a, const json& b) {
    return a["query_id"].dump() < b["query_id"].dump();
  });

  std::string out;
  for (const json& rec : records) out += rec.dump() + "\n";
  write_text_file(out_jsonl, out);
}

}  // namespace facver::papers
