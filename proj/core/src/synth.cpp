#include "qarank/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "qarank/util.hpp"

namespace qarank {

namespace {

std::string keyword_token(int label, int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "t%02dw%02d", label, k);
  return buf;
}

std::string background_token(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "bg%04d", i);
  return buf;
}

Eigen::VectorXd random_unit(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  double n = v.norm();
  return n > 0 ? Eigen::VectorXd(v / n) : Eigen::VectorXd::Unit(dim, 0);
}

void validate(const SynthConfig& c) {
  if (c.n_labels < 2) throw ConfigError("synth: n_labels must be >= 2");
  if (c.docs_per_label < 2) throw ConfigError("synth: docs_per_label must be >= 2");
  if (c.keywords_per_label < 3)
    throw ConfigError("synth: keywords_per_label must be >= 3 (query triple)");
  if (c.vocab_size <= c.n_labels * c.keywords_per_label)
    throw ConfigError("synth: vocab_size must exceed total keyword count");
  if (c.intruder_fraction < 0.0 || c.intruder_fraction >= 1.0)
    throw ConfigError("synth: intruder_fraction must be in [0, 1)");
  if (c.sentences_min < 1 || c.sentences_max < c.sentences_min)
    throw ConfigError("synth: invalid sentences_per_doc range");
  if (c.embedding_dim < 2) throw ConfigError("synth: embedding_dim must be >= 2");
}

}  // namespace

SynthOutput generate(const SynthConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  SynthOutput out;

  const int n_background = cfg.vocab_size - cfg.n_labels * cfg.keywords_per_label;

  // keyword embeddings cluster around per-label anchors; background is isotropic
  out.embeddings = EmbeddingTable(cfg.embedding_dim, "synthetic");
  std::vector<std::vector<std::string>> keywords(cfg.n_labels);
  for (int l = 0; l < cfg.n_labels; ++l) {
    Eigen::VectorXd anchor = random_unit(rng, cfg.embedding_dim);
    for (int k = 0; k < cfg.keywords_per_label; ++k) {
      std::string tok = keyword_token(l, k);
      keywords[l].push_back(tok);
      Eigen::VectorXd noise(cfg.embedding_dim);
      for (int i = 0; i < cfg.embedding_dim; ++i)
        noise[i] = rng.normal() * (0.15 / std::sqrt(static_cast<double>(cfg.embedding_dim)));
      Eigen::VectorXd v = anchor + noise;
      out.embeddings.insert(tok, v / v.norm());
    }
  }
  for (int i = 0; i < n_background; ++i)
    out.embeddings.insert(background_token(i), random_unit(rng, cfg.embedding_dim));

  std::vector<std::string> label_names(cfg.n_labels);
  for (int l = 0; l < cfg.n_labels; ++l)
    label_names[l] = join({keywords[l][0], keywords[l][1], keywords[l][2]}, "_");

  auto draw_background = [&]() { return background_token(rng.uniform_int(0, n_background - 1)); };
  auto draw_extra_keyword = [&](int l) {
    return keywords[l][rng.uniform_int(3, cfg.keywords_per_label - 1)];
  };

  std::vector<std::vector<std::string>> doc_ids(cfg.n_labels);
  for (int l = 0; l < cfg.n_labels; ++l) {
    for (int m = 0; m < cfg.docs_per_label; ++m) {
      Abstract a;
      char idbuf[32];
      std::snprintf(idbuf, sizeof(idbuf), "a%02d%03d", l, m);
      a.id = idbuf;
      a.label = label_names[l];

      std::vector<std::string> title = {keywords[l][rng.uniform_int(0, 2)],
                                        draw_extra_keyword(l), draw_background(),
                                        draw_background()};
      rng.shuffle(title);
      a.title_raw = join(title, " ");

      int n_sent = rng.uniform_int(cfg.sentences_min, cfg.sentences_max);
      int gold = rng.uniform_int(0, n_sent - 1);
      a.gold_relevant = {gold};
      for (int j = 0; j < n_sent; ++j) {
        std::vector<std::string> words;
        if (j == gold) {
          int extra = rng.uniform_int(1, 3);
          for (int e = 0; e < extra; ++e) words.push_back(draw_extra_keyword(l));
          int bg = rng.uniform_int(2, 4);
          for (int e = 0; e < bg; ++e) words.push_back(draw_background());
          rng.shuffle(words);
          // the query triple stays adjacent so bigram matches hold
          int pos = rng.uniform_int(0, static_cast<int>(words.size()));
          words.insert(words.begin() + pos,
                       {keywords[l][0], keywords[l][1], keywords[l][2]});
        } else {
          int bg = rng.uniform_int(5, 9);
          for (int e = 0; e < bg; ++e) words.push_back(draw_background());
          if (rng.uniform01() < 0.5) {
            int pos = rng.uniform_int(0, static_cast<int>(words.size()) - 1);
            words[pos] = draw_extra_keyword(l);
          }
        }
        a.sentences_raw.push_back(join(words, " ") + ".");
      }
      doc_ids[l].push_back(a.id);
      out.corpus.abstracts.push_back(std::move(a));
    }
  }
  out.corpus.rebuild_label_set();

  int n_intruders = static_cast<int>(
      std::lround(cfg.intruder_fraction * static_cast<double>(cfg.docs_per_label)));
  for (int l = 0; l < cfg.n_labels; ++l) {
    Cluster c;
    c.label = label_names[l];
    c.ids = doc_ids[l];
    std::set<std::string> used(c.ids.begin(), c.ids.end());
    for (int t = 0; t < n_intruders; ++t) {
      int src = (l + 1 + t % (cfg.n_labels - 1)) % cfg.n_labels;
      std::string pick;
      do {
        pick = doc_ids[src][rng.uniform_int(0, cfg.docs_per_label - 1)];
      } while (used.count(pick));
      used.insert(pick);
      c.ids.push_back(pick);
    }
    rng.shuffle(c.ids);
    out.clusters.push_back(std::move(c));
  }
  return out;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& a : corpus.abstracts) {
    nlohmann::json j;
    j["id"] = a.id;
    j["title"] = a.title_raw;
    j["sentences"] = a.sentences_raw;
    if (a.label) j["label"] = *a.label;
    if (!a.gold_relevant.empty())
      j["relevant"] = std::vector<int>(a.gold_relevant.begin(), a.gold_relevant.end());
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string clusters_to_jsonl(const std::vector<Cluster>& clusters) {
  std::string out;
  for (const auto& c : clusters) {
    nlohmann::json j;
    j["cluster_label"] = c.label;
    j["ids"] = c.ids;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string embeddings_to_text(const EmbeddingTable& table) {
  auto tokens = table.tokens_sorted();
  std::string out = std::to_string(tokens.size()) + " " + std::to_string(table.dim()) + "\n";
  char buf[32];
  for (const auto& tok : tokens) {
    out += tok;
    Eigen::VectorXd v = table.lookup(tok);
    for (int i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof(buf), " %.8f", v[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace qarank
