#include "qarank/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "qarank/eval.hpp"
#include "qarank/repr.hpp"
#include "qarank/svm.hpp"
#include "qarank/task1.hpp"
#include "qarank/task2.hpp"
#include "qarank/util.hpp"

namespace qarank {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Prepared {
  Corpus corpus;         // everything in the corpus file, indexed
  Vocabulary vocab;
  Corpus labeled;        // labeled subset (label set = corpus.label_set)
};

// Configured input paths must exist when a command starts.
void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) return;
  if (!fs::exists(path)) throw ConfigError(what + " does not exist: " + path);
}

void require_common_inputs(const RunConfig& cfg) {
  require_file(cfg.paths.corpus, "paths.corpus");
  require_file(cfg.paths.clusters, "paths.clusters");
  require_file(cfg.paths.fasttext, "paths.fasttext");
  require_file(cfg.paths.word2vec, "paths.word2vec");
  require_file(cfg.paths.stopwords, "paths.stopwords");
  require_file(cfg.paths.siamese_scores, "paths.siamese_scores");
}

Prepared prepare_corpus(const RunConfig& cfg) {
  if (cfg.paths.corpus.empty()) throw ConfigError("config: paths.corpus is required");
  require_common_inputs(cfg);
  Prepared p;
  p.corpus = load_corpus(cfg.paths.corpus);
  auto stopwords = load_stopwords(cfg.paths.stopwords);
  p.vocab = build_vocabulary(p.corpus, cfg.corpus.min_doc_freq, stopwords,
                             cfg.corpus.token_pattern);
  p.corpus.index_with(p.vocab, cfg.corpus.token_pattern);
  for (const auto& a : p.corpus.abstracts)
    if (a.label) p.labeled.abstracts.push_back(a);
  p.labeled.rebuild_label_set();
  return p;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.paths.output_dir) / name).string();
}

std::string model_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.paths.model_dir) / name).string();
}

void write_effective_config(const RunConfig& cfg) {
  write_file_atomic(out_path(cfg, "effective_config.json"), dump_run_config(cfg));
}

EmbeddingTable load_table_if(const std::string& path, const std::string& name) {
  if (path.empty()) return EmbeddingTable();
  return load_embeddings(path, std::nullopt, name);
}

LabelScorer topic_scorer(const TopicModel& model) {
  return {model.labels(),
          [&model](const Abstract& a) { return model.predict_proba(a.word_sequence()); }};
}

LabelScorer svm_scorer(const SvmModel& model, int vocab_size) {
  return {model.labels(), [&model, vocab_size](const Abstract& a) {
            return model.predict_proba(to_sparse_vector(bow(a.word_sequence(), vocab_size)));
          }};
}

std::vector<SparseVector> bow_features(const Corpus& corpus, int vocab_size) {
  std::vector<SparseVector> out;
  for (const auto& a : corpus.abstracts)
    out.push_back(to_sparse_vector(bow(a.word_sequence(), vocab_size)));
  return out;
}

std::vector<int> label_indices(const Corpus& corpus, const std::vector<std::string>& labels) {
  std::vector<int> out;
  for (const auto& a : corpus.abstracts) {
    auto it = std::find(labels.begin(), labels.end(), a.label.value());
    if (it == labels.end()) throw DataError("label not in label set: " + *a.label);
    out.push_back(static_cast<int>(it - labels.begin()));
  }
  return out;
}

json metrics_to_json(const Task2Metrics& m) {
  return {{"recall", m.recall},
          {"precision", m.precision},
          {"f1", m.f1},
          {"macro_avg_accuracy", m.macro_avg_accuracy},
          {"per_label_accuracy", m.per_label_accuracy}};
}

// supervised sentence-ranker helpers ---------------------------------------

std::vector<SupTrainExample> sup_examples(const Corpus& corpus,
                                          const EmbeddingTable& table,
                                          const Task2Options& opt,
                                          const SiameseScores* siamese) {
  std::vector<SupTrainExample> examples;
  for (const auto& a : corpus.abstracts) {
    if (!a.label || a.gold_relevant.empty()) continue;
    auto query = query_tokens_from_label(*a.label);
    Bm25Stats stats = abstract_sentence_stats(a, opt);
    Eigen::VectorXd query_esr = esr(query, table);
    Eigen::VectorXd title_esr = esr(a.title_words, table);
    for (size_t j = 0; j < a.sentences_raw.size(); ++j) {
      SupTrainExample ex;
      ex.phi = qar(query, a.sentence_words[j], table, opt.clamp_negative_attention);
      ex.title_esr = title_esr;
      ex.query_esr = query_esr;
      ExtraRelevance lex = bm25_extra(query, tokenize(a.sentences_raw[j]), stats);
      ex.lexical.resize(5);
      ex.lexical << lex.bm25, lex.unigram_match_pct, lex.bigram_match_pct,
          lex.idf_weighted_unigram, lex.idf_weighted_bigram;
      if (siamese) {
        auto it = siamese->find({a.id, static_cast<int>(j)});
        if (it == siamese->end())
          throw DataError("missing siamese score for id=" + a.id + " sentence " +
                          std::to_string(j));
        ex.siamese = it->second;
      }
      ex.label = a.gold_relevant.count(static_cast<int>(j)) ? 1.0 : 0.0;
      examples.push_back(std::move(ex));
    }
  }
  return examples;
}

double sup_dev_maa(const SupRankerParams& params, const Corpus& dev,
                   const EmbeddingTable& table, const Task2Options& opt,
                   const SiameseScores* siamese) {
  std::map<std::string, int> preds;
  std::map<std::string, Task2Gold> gold;
  for (const auto& a : dev.abstracts) {
    if (!a.label || a.gold_relevant.empty() || a.sentences_raw.empty()) continue;
    auto query = query_tokens_from_label(*a.label);
    SentenceScores s = score_sentences_sup(a, query, params, table, opt, siamese);
    preds[a.id] = extract_most_relevant(s.scores);
    gold[a.id] = {*a.label, a.gold_relevant};
  }
  if (preds.empty()) return 0.0;
  return task2_metrics(preds, gold).macro_avg_accuracy;
}

}  // namespace

void cmd_prepare(const RunConfig& cfg) {
  Prepared p = prepare_corpus(cfg);
  if (p.labeled.abstracts.empty()) throw DataError("prepare: corpus has no labeled abstracts");
  auto [train, dev] = split_train_dev(p.labeled, cfg.corpus.dev_fraction, cfg.seed);

  std::string vocab_tsv = "token\tdoc_frequency\n";
  for (int i = 0; i < p.vocab.size(); ++i)
    vocab_tsv += p.vocab.index_to_token[i] + "\t" +
                 std::to_string(p.vocab.doc_frequency[i]) + "\n";
  write_file_atomic(out_path(cfg, "vocab.tsv"), vocab_tsv);
  write_file_atomic(out_path(cfg, "train.jsonl"), corpus_to_jsonl(train));
  write_file_atomic(out_path(cfg, "dev.jsonl"), corpus_to_jsonl(dev));

  json report;
  report["n_abstracts"] = p.corpus.abstracts.size();
  report["n_labeled"] = p.labeled.abstracts.size();
  report["labels"] = p.labeled.label_set;
  report["vocab_size"] = p.vocab.size();
  report["vocab_hash"] = std::to_string(p.vocab.hash());
  json per_label = json::object();
  for (const auto& label : p.labeled.label_set) {
    int n_train = 0, n_dev = 0;
    for (const auto& a : train.abstracts) n_train += a.label == label ? 1 : 0;
    for (const auto& a : dev.abstracts) n_dev += a.label == label ? 1 : 0;
    per_label[label] = {{"train", n_train}, {"dev", n_dev}};
  }
  report["split"] = per_label;
  write_file_atomic(out_path(cfg, "prepare_report.json"), report.dump(2) + "\n");
  write_effective_config(cfg);
  std::cout << "prepared " << p.corpus.abstracts.size() << " abstracts, vocab "
            << p.vocab.size() << ", split " << train.abstracts.size() << "/"
            << dev.abstracts.size() << "\n";
}

void cmd_train(const RunConfig& cfg, const std::string& model) {
  Prepared p = prepare_corpus(cfg);
  if (p.labeled.abstracts.empty()) throw DataError("train: corpus has no labeled abstracts");
  auto [train, dev] = split_train_dev(p.labeled, cfg.corpus.dev_fraction, cfg.seed);

  if (model == "topic") {
    EmbeddingTable fasttext = load_table_if(cfg.paths.fasttext, "fasttext");
    EmbeddingTable w2v = load_table_if(cfg.paths.word2vec, "word2vec");
    TopicHyper hyper = cfg.topic_hyper();
    TopicModel tm = TopicModel::init(p.vocab, p.labeled.label_set, fasttext, w2v, hyper);
    auto history = tm.train(train, dev, hyper);
    tm.save(model_path(cfg, "topic.json"));
    json h;
    h["epochs"] = json::array();
    double best = 0.0;
    for (const auto& e : history) {
      h["epochs"].push_back({{"epoch", e.epoch},
                             {"train_loss", e.train_loss},
                             {"dev_accuracy", e.dev_accuracy}});
      best = std::max(best, e.dev_accuracy);
    }
    h["dev_accuracy"] = best;
    write_file_atomic(out_path(cfg, "topic_history.json"), h.dump(2) + "\n");
    write_effective_config(cfg);
    std::cout << "topic model dev accuracy: " << format_score(best) << "\n";
  } else if (model == "svm") {
    SvmHyper hyper{cfg.svm.C, cfg.svm.gamma, cfg.svm.tol, cfg.svm.max_passes, cfg.seed};
    SvmModel svm = SvmModel::train(bow_features(train, p.vocab.size()),
                                   label_indices(train, p.labeled.label_set),
                                   p.labeled.label_set, p.vocab.size(), p.vocab.hash(), hyper);
    svm.save(model_path(cfg, "svm.json"));
    int correct = 0;
    auto dev_feats = bow_features(dev, p.vocab.size());
    auto dev_labels = label_indices(dev, p.labeled.label_set);
    for (size_t i = 0; i < dev_feats.size(); ++i)
      correct += svm.predict_label(dev_feats[i]) == dev_labels[i] ? 1 : 0;
    double dev_acc = dev_feats.empty() ? 0.0 : static_cast<double>(correct) / dev_feats.size();
    json h;
    h["dev_accuracy"] = dev_acc;
    h["gamma"] = svm.gamma();
    json cls = json::array();
    for (const auto& r : svm.per_class())
      cls.push_back({{"iterations", r.iterations}, {"converged", r.converged}});
    h["classes"] = cls;
    write_file_atomic(out_path(cfg, "svm_history.json"), h.dump(2) + "\n");
    write_effective_config(cfg);
    std::cout << "svm dev accuracy: " << format_score(dev_acc) << "\n";
  } else if (model == "sentranker") {
    EmbeddingTable fasttext = load_table_if(cfg.paths.fasttext, "fasttext");
    if (fasttext.empty()) throw ConfigError("sentranker training requires paths.fasttext");
    Task2Options opt{cfg.bm25.k1, cfg.bm25.b, cfg.repr.clamp_negative_attention};
    SiameseScores siamese;
    bool with_siamese = !cfg.paths.siamese_scores.empty();
    if (with_siamese) {
      siamese = load_siamese_scores(cfg.paths.siamese_scores);
      std::cout << "siamese scores enabled: supervised feature width 7\n";
    }
    auto examples = sup_examples(train, fasttext, opt, with_siamese ? &siamese : nullptr);
    if (examples.empty()) throw DataError("no training sentences with gold relevance");

    std::vector<double> candidates = cfg.task2.beta_candidates;
    if (candidates.empty()) candidates.push_back(cfg.task2.beta);
    SupHyper hyper;
    hyper.projection_dim = cfg.task2.projection_dim;
    hyper.norm = cfg.task2.norm == "l2" ? NormKind::L2 : NormKind::L1;
    hyper.optimizer = cfg.task2.optimizer;
    hyper.learning_rate = cfg.task2.learning_rate;
    hyper.epochs = cfg.task2.epochs;
    hyper.seed = cfg.seed;

    json h;
    h["candidates"] = json::array();
    SupRankerParams best_params;
    double best_maa = -1.0, best_beta = candidates.front();
    for (double beta : candidates) {
      hyper.beta = beta;
      SupTrainResult r = train_sup_ranker(examples, hyper);
      double maa =
          sup_dev_maa(r.params, dev, fasttext, opt, with_siamese ? &siamese : nullptr);
      h["candidates"].push_back({{"beta", beta},
                                 {"final_mse", r.epoch_mse.back()},
                                 {"dev_macro_avg_accuracy", maa}});
      if (maa > best_maa) {
        best_maa = maa;
        best_beta = beta;
        best_params = std::move(r.params);
      }
    }
    h["chosen_beta"] = best_beta;
    h["dev_macro_avg_accuracy"] = best_maa;
    h["feature_width"] = best_params.feature_width();
    best_params.save(model_path(cfg, "sentranker.json"));
    write_file_atomic(out_path(cfg, "sentranker_history.json"), h.dump(2) + "\n");
    write_effective_config(cfg);
    std::cout << "sentence ranker dev macro-average accuracy: " << format_score(best_maa)
              << " (beta=" << best_beta << ")\n";
  } else {
    throw ConfigError("unknown model: " + model + " (expected topic|svm|sentranker)");
  }
}

void cmd_rank_docs(const RunConfig& cfg) {
  if (cfg.paths.clusters.empty()) throw ConfigError("config: paths.clusters is required");
  require_file(model_path(cfg, cfg.task1.model + ".json"),
               "model checkpoint for task1.model=" + cfg.task1.model);
  Prepared p = prepare_corpus(cfg);
  auto clusters = load_clusters(cfg.paths.clusters);
  EmbeddingTable embeddings = load_table_if(cfg.paths.fasttext, "fasttext");

  TopicModel tm;
  SvmModel svm;
  LabelScorer scorer;
  if (cfg.task1.model == "topic") {
    tm = TopicModel::load(model_path(cfg, "topic.json"), p.vocab.hash());
    scorer = topic_scorer(tm);
  } else if (cfg.task1.model == "svm") {
    svm = SvmModel::load(model_path(cfg, "svm.json"), p.vocab.hash());
    scorer = svm_scorer(svm, p.vocab.size());
  } else {
    throw ConfigError("unknown task1 model: " + cfg.task1.model);
  }

  RerankOptions opts;
  opts.mode = rerank_mode_from_string(cfg.task1.rerank);
  opts.combine_with_confidence = cfg.task1.combine_with_confidence;
  opts.clamp_negative_attention = cfg.repr.clamp_negative_attention;
  if (opts.mode != RerankMode::None && embeddings.empty() &&
      (opts.mode == RerankMode::Qar || opts.mode == RerankMode::Sum))
    throw ConfigError("qar rerank requires paths.fasttext embeddings");

  Bm25Stats stats = build_cluster_stats(clusters, p.corpus, cfg.bm25.k1, cfg.bm25.b);

  bool gold_available = true;
  std::map<std::string, std::string> gold;
  for (const auto& c : clusters)
    for (const auto& id : c.ids) {
      const Abstract* a = p.corpus.find(id);
      if (!a) throw DataError("cluster member not found in corpus: " + id);
      if (a->label)
        gold[id] = *a->label;
      else
        gold_available = false;
    }

  std::vector<ClusterRankingEval> conf_eval, rerank_eval;
  for (const auto& c : clusters) {
    RankedList confidence = rank_by_confidence(scorer, c, p.corpus);
    RankedList final_list = rerank(confidence, opts, c.label, p.corpus, embeddings, stats);
    write_file_atomic(
        (fs::path(cfg.paths.output_dir) / "rankings" / (c.label + ".tsv")).string(),
        ranked_list_tsv(final_list));
    if (gold_available) {
      ClusterRankingEval ce{c.label, {}}, re{c.label, {}};
      for (const auto& e : confidence) ce.ranked_ids.push_back(e.id);
      for (const auto& e : final_list) re.ranked_ids.push_back(e.id);
      conf_eval.push_back(std::move(ce));
      rerank_eval.push_back(std::move(re));
    }
  }

  json report;
  report["model"] = cfg.task1.model;
  report["rerank"] = cfg.task1.rerank;
  report["n_clusters"] = clusters.size();
  report["gold_available"] = gold_available;
  if (gold_available) {
    std::map<std::string, double> per_conf, per_rr;
    double map_conf = mean_average_precision(conf_eval, gold, &per_conf);
    double map_rr = mean_average_precision(rerank_eval, gold, &per_rr);
    report["map_confidence"] = map_conf;
    report["map_reranked"] = map_rr;
    report["per_cluster_ap_confidence"] = per_conf;
    report["per_cluster_ap_reranked"] = per_rr;
    std::cout << "mAP (confidence): " << format_score(map_conf) << "\n";
    std::cout << "mAP (" << cfg.task1.rerank << "): " << format_score(map_rr) << "\n";
  } else {
    std::cout << "ranked " << clusters.size() << " clusters (no gold labels, metrics skipped)\n";
  }
  write_file_atomic(out_path(cfg, "rank_docs_report.json"), report.dump(2) + "\n");
  write_effective_config(cfg);
}

void cmd_rank_sents(const RunConfig& cfg) {
  Prepared p = prepare_corpus(cfg);
  if (p.labeled.abstracts.empty())
    throw DataError("rank-sents: corpus has no labeled abstracts (labels are the queries)");

  Corpus target = p.labeled;
  if (cfg.task2.eval_split != "all") {
    auto [train, dev] = split_train_dev(p.labeled, cfg.corpus.dev_fraction, cfg.seed);
    target = cfg.task2.eval_split == "train" ? train : dev;
  }
  for (const auto& a : target.abstracts)
    if (a.sentences_raw.empty())
      throw DataError("abstract has zero sentences: id=" + a.id);

  EmbeddingTable fasttext = load_table_if(cfg.paths.fasttext, "fasttext");
  Task2Options opt{cfg.bm25.k1, cfg.bm25.b, cfg.repr.clamp_negative_attention};

  bool need_sup = false;
  for (const auto& r : cfg.task2.rankers) {
    if (r != "bm25_extra" && r != "version1" && r != "version2" && r != "supervised")
      throw ConfigError("unknown task2 ranker: " + r);
    if (r == "supervised") need_sup = true;
    if ((r == "version1" || r == "version2") && fasttext.empty())
      throw ConfigError("ranker '" + r + "' requires paths.fasttext embeddings");
  }
  for (const auto& m : cfg.task2.ensemble)
    if (std::find(cfg.task2.rankers.begin(), cfg.task2.rankers.end(), m) ==
        cfg.task2.rankers.end())
      throw ConfigError("ensemble member '" + m + "' is not an enabled ranker");

  SupRankerParams sup;
  SiameseScores siamese;
  bool with_siamese = false;
  if (need_sup) {
    if (fasttext.empty()) throw ConfigError("supervised ranker requires paths.fasttext");
    require_file(model_path(cfg, "sentranker.json"), "sentence-ranker checkpoint");
    sup = SupRankerParams::load(model_path(cfg, "sentranker.json"));
    if (sup.feature_width() == 7) {
      if (cfg.paths.siamese_scores.empty())
        throw ConfigError("model expects siamese scores; set paths.siamese_scores");
      siamese = load_siamese_scores(cfg.paths.siamese_scores);
      with_siamese = true;
    } else if (!cfg.paths.siamese_scores.empty()) {
      std::cerr << "note: model was trained without siamese scores; ignoring "
                << cfg.paths.siamese_scores << "\n";
    }
  }

  // predictions per ranker, plus the ensemble
  std::string tsv = "id\tsentence_index\tscore\tranker\n";
  std::map<std::string, std::map<std::string, int>> preds;  // ranker -> id -> index
  std::map<std::string, Task2Gold> gold;
  bool gold_available = true;
  for (const auto& a : target.abstracts) {
    auto query = query_tokens_from_label(*a.label);
    std::map<std::string, std::pair<int, double>> row;  // ranker -> (index, score)
    for (const auto& r : cfg.task2.rankers) {
      SentenceScores s;
      if (r == "bm25_extra")
        s = score_sentences_bm25(a, query, opt);
      else if (r == "version1")
        s = score_sentences_unsup(a, query, UnsupVersion::V1, fasttext, opt);
      else if (r == "version2")
        s = score_sentences_unsup(a, query, UnsupVersion::V2, fasttext, opt);
      else
        s = score_sentences_sup(a, query, sup, fasttext, opt,
                                with_siamese ? &siamese : nullptr);
      int idx = extract_most_relevant(s.scores);
      row[r] = {idx, s.scores[idx]};
      preds[r][a.id] = idx;
    }
    std::vector<int> votes;
    for (const auto& m : cfg.task2.ensemble) votes.push_back(row[m].first);
    int chosen = ensemble_vote(votes);
    int agree = 0;
    for (int v : votes) agree += v == chosen ? 1 : 0;
    preds["ensemble"][a.id] = chosen;

    for (const auto& r : cfg.task2.rankers)
      tsv += a.id + "\t" + std::to_string(row[r].first) + "\t" +
             format_score(row[r].second) + "\t" + r + "\n";
    tsv += a.id + "\t" + std::to_string(chosen) + "\t" +
           format_score(static_cast<double>(agree) / votes.size()) + "\tensemble\n";

    if (a.gold_relevant.empty())
      gold_available = false;
    else
      gold[a.id] = {*a.label, a.gold_relevant};
  }
  write_file_atomic(out_path(cfg, "sentences.tsv"), tsv);

  json report;
  report["rankers"] = cfg.task2.rankers;
  report["ensemble"] = cfg.task2.ensemble;
  report["eval_split"] = cfg.task2.eval_split;
  report["n_abstracts"] = target.abstracts.size();
  report["gold_available"] = gold_available;
  if (gold_available) {
    json metrics = json::object();
    std::cout << "ranker              recall   F1       MAA\n";
    auto emit = [&](const std::string& name) {
      Task2Metrics m = task2_metrics(preds[name], gold);
      metrics[name] = metrics_to_json(m);
      std::printf("%-18s  %.4f   %.4f   %.4f\n", name.c_str(), m.recall, m.f1,
                  m.macro_avg_accuracy);
    };
    for (const auto& r : cfg.task2.rankers) emit(r);
    emit("ensemble");
    report["metrics"] = metrics;
  } else {
    std::cout << "ranked sentences for " << target.abstracts.size()
              << " abstracts (no gold annotations, metrics skipped)\n";
  }
  write_file_atomic(out_path(cfg, "rank_sents_report.json"), report.dump(2) + "\n");
  write_effective_config(cfg);
}

void cmd_evaluate(const RunConfig& cfg) {
  Prepared p = prepare_corpus(cfg);
  json report;
  bool any = false;

  if (!cfg.evaluate.rankings_dir.empty()) {
    any = true;
    std::map<std::string, std::string> gold;
    for (const auto& a : p.corpus.abstracts)
      if (a.label) gold[a.id] = *a.label;
    std::vector<ClusterRankingEval> evals;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(cfg.evaluate.rankings_dir))
      if (entry.path().extension() == ".tsv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      ClusterRankingEval ce;
      ce.label = file.stem().string();
      std::ifstream in(file);
      std::string line;
      bool header = true;
      while (std::getline(in, line)) {
        if (header) {
          header = false;
          continue;
        }
        if (line.empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() < 2) throw DataError(file.string() + ": malformed TSV row");
        ce.ranked_ids.push_back(fields[1]);
      }
      evals.push_back(std::move(ce));
    }
    if (evals.empty()) throw DataError("no .tsv ranking files in " + cfg.evaluate.rankings_dir);
    std::map<std::string, double> per_cluster;
    double map = mean_average_precision(evals, gold, &per_cluster);
    report["task1"] = {{"map", map}, {"per_cluster_ap", per_cluster}};
    std::cout << "mAP: " << format_score(map) << "\n";
  }

  if (!cfg.evaluate.sentences_file.empty()) {
    any = true;
    std::map<std::string, std::map<std::string, int>> preds;
    std::ifstream in(cfg.evaluate.sentences_file);
    if (!in) throw DataError("cannot open " + cfg.evaluate.sentences_file);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (header) {
        header = false;
        continue;
      }
      if (line.empty()) continue;
      auto fields = split(line, '\t');
      if (fields.size() != 4)
        throw DataError(cfg.evaluate.sentences_file + ": malformed TSV row");
      preds[fields[3]][fields[0]] = std::stoi(fields[1]);
    }
    // gold restricted to the abstracts the predictions file covers
    std::set<std::string> predicted_ids;
    for (const auto& [ranker, pr] : preds)
      for (const auto& [id, idx] : pr) predicted_ids.insert(id);
    std::map<std::string, Task2Gold> gold;
    for (const auto& a : p.corpus.abstracts)
      if (a.label && !a.gold_relevant.empty() && predicted_ids.count(a.id))
        gold[a.id] = {*a.label, a.gold_relevant};
    json metrics = json::object();
    std::cout << "ranker              recall   F1       MAA\n";
    for (const auto& [ranker, pr] : preds) {
      Task2Metrics m = task2_metrics(pr, gold);
      metrics[ranker] = metrics_to_json(m);
      std::printf("%-18s  %.4f   %.4f   %.4f\n", ranker.c_str(), m.recall, m.f1,
                  m.macro_avg_accuracy);
    }
    report["task2"] = {{"metrics", metrics}};
  }

  if (!any)
    throw ConfigError("evaluate: set evaluate.rankings_dir and/or evaluate.sentences_file");
  write_file_atomic(out_path(cfg, "eval_report.json"), report.dump(2) + "\n");
  write_effective_config(cfg);
}

void cmd_synth(const RunConfig& cfg) {
  SynthOutput out = generate(cfg.synth);
  write_file_atomic(out_path(cfg, "corpus.jsonl"), corpus_to_jsonl(out.corpus));
  write_file_atomic(out_path(cfg, "clusters.jsonl"), clusters_to_jsonl(out.clusters));
  write_file_atomic(out_path(cfg, "embeddings.txt"), embeddings_to_text(out.embeddings));

  // ready-to-run config for the generated corpus
  RunConfig run = cfg;
  run.paths.corpus = out_path(cfg, "corpus.jsonl");
  run.paths.clusters = out_path(cfg, "clusters.jsonl");
  run.paths.fasttext = out_path(cfg, "embeddings.txt");
  run.paths.word2vec = "";
  run.paths.stopwords = "";
  run.paths.siamese_scores = "";
  write_file_atomic(out_path(cfg, "run_config.json"), dump_run_config(run));
  write_effective_config(cfg);
  std::cout << "generated " << out.corpus.abstracts.size() << " abstracts, "
            << out.clusters.size() << " clusters into " << cfg.paths.output_dir << "\n";
}

}  // namespace qarank
