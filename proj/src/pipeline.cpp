// Copyright 2026 The kgcd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgcd/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "kgcd/discovery.hpp"
#include "kgcd/error.hpp"
#include "kgcd/parallel.hpp"
#include "kgcd/random.hpp"
#include "kgcd/relevancy.hpp"
#include "kgcd/synthetic.hpp"
#include "kgcd/verbalizer.hpp"

namespace kgcd {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                const std::string& section) {
  if (!obj.is_object()) throw ConfigError("'" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in '" + section + "'");
    }
  }
}

template <typename T>
void read_opt(const nlohmann::json& obj, const char* key, T& target) {
  if (obj.contains(key) && !obj.at(key).is_null()) target = obj.at(key).get<T>();
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string sre_template(const PipelineConfig& c) {
  return c.sre.template_path.empty() ? std::string(kDefaultSreTemplate)
                                     : read_text_file(c.resolve(c.sre.template_path));
}

std::string discovery_template(const PipelineConfig& c) {
  return c.discovery.template_path.empty()
             ? std::string(kDefaultDiscoveryTemplate)
             : read_text_file(c.resolve(c.discovery.template_path));
}

std::uint64_t train_seed(const PipelineConfig& c) {
  return c.ranker.train_seed.value_or(derive_seed(c.seed, "train"));
}

// Writes to "<path>.tmp" and renames on commit, so a failed command never
// leaves a partial artifact behind.
class AtomicFile {
 public:
  explicit AtomicFile(fs::path path)
      : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot write '" + path_.string() + "'");
  }
  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) throw IoError("write failed for '" + path_.string() + "'");
    out_.close();
    fs::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  fs::path path_;
  fs::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_sidecar(const fs::path& out_path, const PipelineConfig& config,
                   const std::string& command, const ojson& extra = {}) {
  ojson j;
  j["command"] = command;
  j["config"] = config.to_json();
  for (const auto& [k, v] : extra.items()) j[k] = v;
  AtomicFile f(out_path.string() + ".config.json");
  f.stream() << j.dump(2) << '\n';
  f.commit();
}

KnowledgeGraph load_configured_kg(const PipelineConfig& c) {
  if (c.kg.path.empty()) throw ConfigError("kg.path is not set");
  return load_kg(c.resolve(c.kg.path), parse_kg_format(c.kg.format));
}

ExtractOptions extract_options(const PipelineConfig& c) {
  ExtractOptions o;
  o.max_hops = c.kg.max_hops;
  o.candidate_limit = c.kg.candidate_limit;
  o.seed = derive_seed(c.seed, "extract");
  o.type_pattern = c.kg.type_pattern;
  o.relation_pattern = c.kg.relation_pattern;
  return o;
}

RankerModel load_model(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return RankerModel::FromJson(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Maps library exceptions to exit codes. Backend outages count as
// configuration/I-O failures.
template <typename Fn>
int guarded(std::ostream& log, const char* command, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    log << command << ": error: " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    log << command << ": error: " << e.what() << '\n';
  } catch (const nlohmann::json::exception& e) {
    log << command << ": error: " << e.what() << '\n';
  }
  return kExitConfig;
}

}  // namespace

fs::path PipelineConfig::resolve(const std::string& path) const {
  fs::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

PipelineConfig PipelineConfig::FromJson(const nlohmann::json& j,
                                        const fs::path& base_dir) {
  PipelineConfig c;
  c.base_dir = base_dir.empty() ? fs::path(".") : base_dir;
  try {
    check_keys(j, {"seed", "kg", "llm", "sre", "ranker", "discovery", "eval"}, "config");
    read_opt(j, "seed", c.seed);
    if (j.contains("kg")) {
      const auto& s = j.at("kg");
      check_keys(s, {"path", "format", "max_hops", "candidate_limit",
                     "type_pattern", "relation_pattern"}, "kg");
      read_opt(s, "path", c.kg.path);
      read_opt(s, "format", c.kg.format);
      read_opt(s, "max_hops", c.kg.max_hops);
      read_opt(s, "candidate_limit", c.kg.candidate_limit);
      read_opt(s, "type_pattern", c.kg.type_pattern);
      read_opt(s, "relation_pattern", c.kg.relation_pattern);
    }
    if (j.contains("llm")) {
      const auto& s = j.at("llm");
      check_keys(s, {"backend", "endpoint", "model", "api_key_env", "parallelism",
                     "max_retries", "base_backoff_ms", "timeout_s",
                     "mock_config_path"}, "llm");
      read_opt(s, "backend", c.llm.backend);
      read_opt(s, "endpoint", c.llm.endpoint);
      read_opt(s, "model", c.llm.model);
      read_opt(s, "api_key_env", c.llm.api_key_env);
      read_opt(s, "parallelism", c.llm.parallelism);
      read_opt(s, "max_retries", c.llm.max_retries);
      read_opt(s, "base_backoff_ms", c.llm.base_backoff_ms);
      read_opt(s, "timeout_s", c.llm.timeout_s);
      read_opt(s, "mock_config_path", c.llm.mock_config_path);
    }
    if (j.contains("sre")) {
      const auto& s = j.at("sre");
      check_keys(s, {"k_max", "template_path", "max_tokens"}, "sre");
      read_opt(s, "k_max", c.sre.k_max);
      read_opt(s, "template_path", c.sre.template_path);
      read_opt(s, "max_tokens", c.sre.max_tokens);
    }
    if (j.contains("ranker")) {
      const auto& s = j.at("ranker");
      check_keys(s, {"kind", "loss", "ngram", "gbdt", "train", "include_types",
                     "hash_buckets"}, "ranker");
      read_opt(s, "kind", c.ranker.kind);
      read_opt(s, "loss", c.ranker.loss);
      read_opt(s, "include_types", c.ranker.include_types);
      read_opt(s, "hash_buckets", c.ranker.hash_buckets);
      if (s.contains("ngram")) {
        const auto& n = s.at("ngram");
        check_keys(n, {"n", "d", "epochs", "lr"}, "ranker.ngram");
        read_opt(n, "n", c.ranker.ngram.n);
        read_opt(n, "d", c.ranker.ngram.dim);
        read_opt(n, "epochs", c.ranker.ngram.epochs);
        read_opt(n, "lr", c.ranker.ngram.learning_rate);
      }
      if (s.contains("gbdt")) {
        const auto& g = s.at("gbdt");
        check_keys(g, {"rounds", "depth", "lr", "min_samples_leaf"}, "ranker.gbdt");
        read_opt(g, "rounds", c.ranker.gbdt.rounds);
        read_opt(g, "depth", c.ranker.gbdt.max_depth);
        read_opt(g, "lr", c.ranker.gbdt.learning_rate);
        read_opt(g, "min_samples_leaf", c.ranker.gbdt.min_samples_leaf);
      }
      if (s.contains("train")) {
        const auto& t = s.at("train");
        check_keys(t, {"epochs", "lr", "seed", "batch", "hidden", "patience"},
                   "ranker.train");
        read_opt(t, "epochs", c.ranker.train.epochs);
        read_opt(t, "lr", c.ranker.train.learning_rate);
        read_opt(t, "batch", c.ranker.train.batch);
        read_opt(t, "hidden", c.ranker.train.hidden);
        read_opt(t, "patience", c.ranker.train.patience);
        if (t.contains("seed") && !t.at("seed").is_null()) {
          c.ranker.train_seed = t.at("seed").get<std::uint64_t>();
        }
      }
    }
    if (j.contains("discovery")) {
      const auto& s = j.at("discovery");
      check_keys(s, {"k", "style", "template_path", "mode"}, "discovery");
      read_opt(s, "k", c.discovery.k);
      read_opt(s, "style", c.discovery.style);
      read_opt(s, "template_path", c.discovery.template_path);
      read_opt(s, "mode", c.discovery.mode);
    }
    if (j.contains("eval")) {
      const auto& s = j.at("eval");
      check_keys(s, {"ks"}, "eval");
      read_opt(s, "ks", c.eval.ks);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::Load(const fs::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return FromJson(j, path.parent_path());
}

void PipelineConfig::validate() const {
  try {
    parse_kg_format(kg.format);
    parse_style_variant(discovery.style);
    parse_ranker_kind(ranker.kind);
    parse_loss_kind(ranker.loss);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (llm.backend != "mock" && llm.backend != "http") {
    throw ConfigError("llm.backend must be 'mock' or 'http'");
  }
  static const std::set<std::string> kModes = {"ranker", "no-subgraph",
                                               "permutation", "random", "similarity"};
  if (!kModes.contains(discovery.mode)) {
    throw ConfigError("unknown discovery.mode '" + discovery.mode + "'");
  }
  if (kg.max_hops < 1 || kg.max_hops > kMaxHopsCap) {
    throw ConfigError("kg.max_hops must be in [1, " + std::to_string(kMaxHopsCap) + "]");
  }
  if (kg.candidate_limit == 0) throw ConfigError("kg.candidate_limit must be positive");
  if (sre.k_max == 0) throw ConfigError("sre.k_max must be positive");
  if (discovery.k == 0) throw ConfigError("discovery.k must be positive");
  if (llm.parallelism < 1) throw ConfigError("llm.parallelism must be positive");
  if (llm.max_retries < 0) throw ConfigError("llm.max_retries must be >= 0");
  if (ranker.hash_buckets == 0) throw ConfigError("ranker.hash_buckets must be positive");
  if (ranker.ngram.n < 2 || ranker.ngram.dim < 1 || ranker.ngram.epochs < 1 ||
      ranker.ngram.learning_rate <= 0) {
    throw ConfigError("ranker.ngram needs n >= 2 and positive d, epochs and lr");
  }
  const auto& t = ranker.train;
  if (t.epochs < 1 || t.learning_rate <= 0 || t.batch == 0 || t.hidden == 0 ||
      t.patience < 0) {
    throw ConfigError("ranker.train needs positive epochs, lr, batch and hidden");
  }
  const auto& g = ranker.gbdt;
  if (g.rounds < 1 || g.max_depth < 0 || g.learning_rate <= 0 ||
      g.min_samples_leaf == 0) {
    throw ConfigError("ranker.gbdt needs positive rounds, lr and min_samples_leaf");
  }
  if (sre.max_tokens < 1) throw ConfigError("sre.max_tokens must be positive");
  for (std::size_t k : eval.ks) {
    if (k == 0) throw ConfigError("eval.ks entries must be positive");
  }
}

ojson PipelineConfig::to_json() const {
  ojson j;
  j["seed"] = seed;
  j["kg"] = {{"path", kg.path},
             {"format", kg.format},
             {"max_hops", kg.max_hops},
             {"candidate_limit", kg.candidate_limit},
             {"type_pattern", kg.type_pattern},
             {"relation_pattern", kg.relation_pattern}};
  // Only the variable name of the credential is recorded, never its value.
  j["llm"] = {{"backend", llm.backend},
              {"endpoint", llm.endpoint},
              {"model", llm.model},
              {"api_key_env", llm.api_key_env},
              {"parallelism", llm.parallelism},
              {"max_retries", llm.max_retries},
              {"base_backoff_ms", llm.base_backoff_ms},
              {"timeout_s", llm.timeout_s},
              {"mock_config_path", llm.mock_config_path}};
  j["sre"] = {{"k_max", sre.k_max},
              {"template_path", sre.template_path},
              {"max_tokens", sre.max_tokens}};
  ojson train = {{"epochs", ranker.train.epochs},
                 {"lr", ranker.train.learning_rate},
                 {"seed", nullptr},
                 {"batch", ranker.train.batch},
                 {"hidden", ranker.train.hidden},
                 {"patience", ranker.train.patience}};
  if (ranker.train_seed) train["seed"] = *ranker.train_seed;
  j["ranker"] = {{"kind", ranker.kind},
                 {"loss", ranker.loss},
                 {"ngram", {{"n", ranker.ngram.n},
                            {"d", ranker.ngram.dim},
                            {"epochs", ranker.ngram.epochs},
                            {"lr", ranker.ngram.learning_rate}}},
                 {"gbdt", {{"rounds", ranker.gbdt.rounds},
                           {"depth", ranker.gbdt.max_depth},
                           {"lr", ranker.gbdt.learning_rate},
                           {"min_samples_leaf", ranker.gbdt.min_samples_leaf}}},
                 {"train", train},
                 {"include_types", ranker.include_types},
                 {"hash_buckets", ranker.hash_buckets}};
  j["discovery"] = {{"k", discovery.k},
                    {"style", discovery.style},
                    {"template_path", discovery.template_path},
                    {"mode", discovery.mode}};
  j["eval"] = {{"ks", eval.ks}};
  return j;
}

namespace {

ojson provenance(const PipelineConfig& c) {
  ojson seeds = {{"root", c.seed},
                 {"extract", derive_seed(c.seed, "extract")},
                 {"sre", derive_seed(c.seed, "sre")},
                 {"ngram", derive_seed(c.seed, "ngram")},
                 {"train", train_seed(c)}};
  ojson hashes;
  try {
    hashes["sre"] = hex64(fnv1a64(sre_template(c)));
    hashes["discovery"] = hex64(fnv1a64(discovery_template(c)));
  } catch (const IoError&) {
    hashes = nullptr;
  }
  return {{"seeds", seeds}, {"template_hashes", hashes}};
}

}  // namespace

std::unique_ptr<Backend> make_backend(const PipelineConfig& c) {
  if (c.llm.backend == "mock") {
    if (c.llm.mock_config_path.empty()) {
      throw ConfigError("llm.mock_config_path is required for the mock backend");
    }
    return std::make_unique<MockBackend>(
        MockOracleConfig::Load(c.resolve(c.llm.mock_config_path)));
  }
  HttpBackendConfig h;
  h.endpoint = c.llm.endpoint;
  h.model = c.llm.model;
  h.api_key_env = c.llm.api_key_env;
  h.max_retries = c.llm.max_retries;
  h.base_backoff = std::chrono::milliseconds(c.llm.base_backoff_ms);
  h.parallelism = c.llm.parallelism;
  h.timeout = std::chrono::seconds(c.llm.timeout_s);
  return std::make_unique<HttpBackend>(std::move(h));
}

int cmd_extract(const PipelineConfig& config, const fs::path& pairs_path,
                const fs::path& out_path, std::ostream& log) {
  return guarded(log, "extract", [&] {
    const KnowledgeGraph kg = load_configured_kg(config);
    const auto instances = read_instances(pairs_path);
    const ExtractOptions options = extract_options(config);
    std::size_t unresolved = 0;
    AtomicFile out(out_path);
    for (const auto& inst : instances) {
      const CandidateRecord rec = extract_candidates(kg, inst, options);
      if (!rec.resolved) {
        ++unresolved;
        log << "extract: " << inst.qid << ": pair not found in the graph\n";
      }
      out.stream() << candidate_record_to_json(rec).dump() << '\n';
    }
    out.commit();
    write_sidecar(out_path, config, "extract", provenance(config));
    log << "extract: " << instances.size() << " pairs, " << unresolved
        << " unresolved\n";
    return kExitOk;
  });
}

int cmd_estimate(const PipelineConfig& config, const fs::path& candidates_path,
                 const fs::path& out_path, std::ostream& log, Backend* backend) {
  return guarded(log, "estimate", [&] {
    const auto records = read_candidates(candidates_path);
    std::unique_ptr<Backend> owned;
    if (backend == nullptr) {
      owned = make_backend(config);
      backend = owned.get();
    }
    SreOptions options;
    options.template_text = sre_template(config);
    options.max_tokens = config.sre.max_tokens;
    options.k_max = config.sre.k_max;
    options.seed = derive_seed(config.seed, "sre");
    options.parallelism = config.llm.parallelism;

    AtomicFile out(out_path);
    const DatasetSummary summary =
        write_ranked_dataset(records, *backend, options, out.stream());
    log << "estimate: " << summary.pairs_processed << " ranked, "
        << summary.pairs_skipped << " without candidates, " << summary.pairs_failed
        << " failed, " << summary.backend_calls << " backend calls\n";
    if (summary.pairs_failed > 0 && summary.pairs_processed == 0) {
      log << "estimate: backend failed for every pair; no output written\n";
      return kExitConfig;
    }
    out.commit();
    ojson extra = provenance(config);
    extra["summary"] = {{"pairs_processed", summary.pairs_processed},
                        {"pairs_skipped", summary.pairs_skipped},
                        {"pairs_failed", summary.pairs_failed},
                        {"backend_calls", summary.backend_calls}};
    write_sidecar(out_path, config, "estimate", extra);
    return summary.pairs_failed > 0 ? kExitDegraded : kExitOk;
  });
}

int cmd_train(const PipelineConfig& config, const fs::path& dataset_path,
              const fs::path& model_path, std::ostream& log) {
  return guarded(log, "train", [&] {
    const auto dataset = read_ranked_dataset(dataset_path);
    const RankerKind kind = parse_ranker_kind(config.ranker.kind);
    const FeatureConfig features{config.ranker.include_types,
                                 config.ranker.hash_buckets};
    TrainConfig train = config.ranker.train;
    train.seed = train_seed(config);
    train.gbdt = config.ranker.gbdt;

    RankerModel model;
    if (kind == RankerKind::kRandom) {
      model = make_random_ranker(train.seed);
    } else {
      const auto corpus = build_ranker_corpus(dataset, features.include_types);
      if (corpus.empty()) throw InvalidArgument("ranked dataset has no metapaths");
      NgramLmConfig lm_config = config.ranker.ngram;
      lm_config.seed = derive_seed(config.seed, "ngram");
      NgramLm lm = train_ngram_lm(corpus, lm_config);
      switch (kind) {
        case RankerKind::kNeural:
          model = train_neural_ranker(dataset, lm, parse_loss_kind(config.ranker.loss),
                                      train, features);
          break;
        case RankerKind::kGbdt:
          model = train_gbdt_ranker(dataset, lm, train, features);
          break;
        default:
          model = make_similarity_ranker(std::move(lm));
          model.features = features;
          break;
      }
    }
    ojson j = model.to_json();
    j["config"] = config.to_json();
    j["provenance"] = provenance(config);
    AtomicFile out(model_path);
    out.stream() << j.dump() << '\n';
    out.commit();
    log << "train: " << to_string(model.kind) << " ranker from " << dataset.size()
        << " records";
    if (model.skipped_records > 0) log << ", " << model.skipped_records << " skipped";
    log << '\n';
    return kExitOk;
  });
}

int cmd_rank(const PipelineConfig& config, const fs::path& model_path,
             const fs::path& candidates_path, const fs::path& out_path,
             std::ostream& log) {
  return guarded(log, "rank", [&] {
    const RankerModel model = load_model(model_path);
    const auto records = read_candidates(candidates_path);
    const auto hyphen = VerbalizationStyle::Of(StyleVariant::kHyphen);
    AtomicFile out(out_path);
    for (const auto& rec : records) {
      ojson j;
      j["qid"] = rec.instance.qid;
      j["e1"] = rec.instance.e1;
      j["e2"] = rec.instance.e2;
      auto ranking = ojson::array();
      const auto scored =
          rank_subgraphs(model, rec.instance.e1, rec.instance.e2, rec.candidates);
      for (std::size_t i = 0; i < scored.size(); ++i) {
        ranking.push_back({{"rank", i + 1},
                           {"score", scored[i].score},
                           {"path", verbalize(scored[i].subgraph, hyphen)},
                           {"subgraph", subgraph_to_json(scored[i].subgraph)}});
      }
      j["ranking"] = std::move(ranking);
      out.stream() << j.dump() << '\n';
    }
    out.commit();
    write_sidecar(out_path, config, "rank", provenance(config));
    log << "rank: " << records.size() << " records\n";
    return kExitOk;
  });
}

int cmd_discover(const PipelineConfig& config, const fs::path& model_path,
                 const fs::path& pairs_path, const fs::path& out_path,
                 std::ostream& log, Backend* backend) {
  return guarded(log, "discover", [&] {
    const KnowledgeGraph kg = load_configured_kg(config);
    const auto instances = read_instances(pairs_path);
    std::unique_ptr<Backend> owned;
    if (backend == nullptr) {
      owned = make_backend(config);
      backend = owned.get();
    }
    DiscoveryOptions options;
    options.k = config.discovery.k;
    options.style = VerbalizationStyle::Of(parse_style_variant(config.discovery.style));
    options.template_text = discovery_template(config);
    options.extract = extract_options(config);

    const std::string& mode = config.discovery.mode;
    std::optional<RankerModel> model;
    ojson notes = ojson::array();
    if (mode == "no-subgraph") {
      options.mode = SelectionMode::kNoSubgraph;
    } else if (mode == "permutation") {
      options.mode = SelectionMode::kPermutation;
    } else if (mode == "random") {
      model = make_random_ranker(derive_seed(config.seed, "random-ranker"));
    } else if (mode == "similarity") {
      if (model_path.empty()) {
        throw ConfigError("similarity mode needs --model to supply embeddings");
      }
      RankerModel source = load_model(model_path);
      if (!source.lm) throw ConfigError("model file carries no n-gram embeddings");
      model = make_similarity_ranker(*source.lm);
      notes.push_back(
          "similarity baseline uses in-house n-gram embeddings instead of a "
          "pretrained sentence encoder");
    } else {
      if (model_path.empty()) throw ConfigError("ranker mode needs --model");
      model = load_model(model_path);
    }

    const std::size_t n = instances.size();
    std::vector<std::optional<PairOutcome>> results(n);
    std::vector<std::string> errors(n);
    parallel_for(n, config.llm.parallelism, [&](std::size_t i) {
      try {
        results[i] = classify_pair(instances[i], kg, model ? &*model : nullptr,
                                   *backend, options);
      } catch (const BackendUnavailable& e) {
        errors[i] = e.what();
      } catch (const BackendRejected& e) {
        errors[i] = e.what();
      } catch (const CapabilityMissing& e) {
        errors[i] = e.what();
      }
    });

    std::size_t failed = 0, degraded = 0, unparseable = 0;
    AtomicFile out(out_path);
    for (std::size_t i = 0; i < n; ++i) {
      if (!results[i]) {
        ++failed;
        log << "discover: " << errors[i] << '\n';
        continue;
      }
      degraded += results[i]->degraded ? 1 : 0;
      unparseable += results[i]->prediction.predicted ? 0 : 1;
      out.stream() << prediction_to_json(results[i]->prediction).dump() << '\n';
    }
    log << "discover: " << n - failed << " predictions (" << unparseable
        << " unparseable, " << degraded << " permutation fallbacks), " << failed
        << " failed\n";
    if (n > 0 && failed == n) {
      log << "discover: backend failed for every pair; no output written\n";
      return kExitConfig;
    }
    out.commit();
    ojson extra = provenance(config);
    extra["mode"] = mode;
    extra["notes"] = notes;
    write_sidecar(out_path, config, "discover", extra);
    return failed + degraded + unparseable > 0 ? kExitDegraded : kExitOk;
  });
}

int cmd_eval(const PipelineConfig& config, const EvalInputs& inputs,
             const fs::path& out_path, std::ostream& log) {
  return guarded(log, "eval", [&] {
    const auto predictions = read_predictions(inputs.predictions);
    const auto golds = read_instances(inputs.gold);
    EvaluationReport report;
    report.classification = evaluate_classification(predictions, golds);
    ojson notes = ojson::array();
    if (!inputs.gold_adjacency.empty()) {
      const GoldGraph gold = read_gold_graph(inputs.gold_adjacency);
      report.graph = hamming(aggregate_graph(predictions, gold.variables),
                             gold.adjacency);
      notes.push_back("graph built from predictions over all ordered pairs");
    }
    if (inputs.model.empty() != inputs.ranked_dataset.empty()) {
      throw ConfigError("ranking metrics need both --model and --dataset");
    }
    if (!inputs.model.empty()) {
      const RankerModel model = load_model(inputs.model);
      const auto dataset = read_ranked_dataset(inputs.ranked_dataset);
      report.ranking = evaluate_ranking(model, dataset, config.eval.ks);
      if (model.kind == RankerKind::kSimilarity) {
        notes.push_back(
            "similarity baseline uses in-house n-gram embeddings instead of a "
            "pretrained sentence encoder");
      }
    }
    ojson j = report.to_json();
    j["notes"] = notes;
    j["config"] = config.to_json();
    j["provenance"] = provenance(config);
    AtomicFile out(out_path);
    out.stream() << j.dump(2) << '\n';
    out.commit();
    const auto& c = report.classification;
    log << "eval: P=" << c.precision << " R=" << c.recall << " F1=" << c.f1 << '\n';
    return c.unparseable > 0 || c.precision_undefined ? kExitDegraded : kExitOk;
  });
}

int cmd_synth(std::uint64_t seed, std::size_t causal_pairs,
              std::size_t noncausal_pairs, double flip_rate, const fs::path& dir,
              std::ostream& log) {
  return guarded(log, "synth", [&] {
    SyntheticConfig sc;
    sc.seed = seed;
    sc.causal_pairs = causal_pairs;
    sc.noncausal_pairs = noncausal_pairs;
    sc.flip_rate = flip_rate;
    const SyntheticData data = make_synthetic(sc);
    write_synthetic(data, dir);
    PipelineConfig config;
    config.seed = seed;
    config.kg.path = "kg.jsonl";
    config.llm.mock_config_path = "mock.json";
    AtomicFile out(dir / "config.json");
    out.stream() << config.to_json().dump(2) << '\n';
    out.commit();
    log << "synth: " << data.pairs.size() << " pairs, " << data.nodes.size()
        << " nodes, " << data.edges.size() << " edges in " << dir.string() << '\n';
    return kExitOk;
  });
}

}  // namespace kgcd
