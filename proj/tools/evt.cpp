// evt — command-line driver for the event detection and classification
// toolkit: data conversion, training, tagging, scoring, embedding
// statistics and plot emission.
//
// Exit status: 0 success, 1 usage error, 2 data/format error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evt/corpus.hpp"
#include "evt/embeddings.hpp"
#include "evt/evaluation.hpp"
#include "evt/network.hpp"
#include "evt/training.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kDataError = 2;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// convert
// ---------------------------------------------------------------------------

struct ConvertArgs {
  std::string in_path, out_path;
  std::string train_path, dev_path, test_path, vectors_path;
  uint64_t seed = 42;
  int dim = 50;
  int n_train = 2000, n_dev = 200, n_test = 200;
};

int run_convert(const ConvertArgs& a) {
  const bool synthetic = !a.train_path.empty() || !a.dev_path.empty() ||
                         !a.test_path.empty() || !a.vectors_path.empty();
  if (synthetic) {
    if (a.train_path.empty() || a.dev_path.empty() || a.test_path.empty() ||
        a.vectors_path.empty()) {
      std::cerr << "convert: synthetic generation needs --train, --dev, --test and --vectors\n";
      return kUsageError;
    }
    evt::Corpus train = evt::generate_synthetic_corpus(a.seed, a.n_train);
    evt::Corpus dev = evt::generate_synthetic_corpus(a.seed + 1, a.n_dev);
    evt::Corpus test = evt::generate_synthetic_corpus(a.seed + 2, a.n_test);
    evt::write_column_path(train, a.train_path);
    evt::write_column_path(dev, a.dev_path);
    evt::write_column_path(test, a.test_path);
    std::ostringstream vec;
    evt::write_random_vectors(evt::template_vocabulary(), a.dim, a.seed + 3, vec);
    write_text_file(a.vectors_path, vec.str());
    return kOk;
  }
  if (a.in_path.empty()) {
    std::cerr << "convert: nothing to do (give --in, or the synthetic flags)\n";
    return kUsageError;
  }
  const evt::Corpus c = evt::read_column_path(a.in_path);
  if (!a.out_path.empty()) {
    evt::write_column_path(c, a.out_path);
    return kOk;
  }
  const evt::CountsReport stats = evt::corpus_stats(c);
  std::printf("sentences %zu\n", c.sentences.size());
  std::printf("events %ld\n", stats.total_events);
  std::printf("multi_token_events %ld\n", stats.multi_token_events);
  std::printf("event_tokens %ld\n", stats.total_event_tokens);
  for (int i = 0; i < evt::kNumEventClasses; ++i)
    std::printf("class %s %ld\n", evt::class_name(static_cast<evt::EventClass>(i)).c_str(),
                stats.events_per_class[i]);
  for (const auto& [pos, n] : stats.event_tokens_per_pos)
    std::printf("pos %s %ld\n", pos.c_str(), n);
  return kOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string train_path, dev_path, vectors_path, config_path, model_path;
  uint64_t seed = 0;
  bool seed_given = false;
};

int run_train(const TrainArgs& a) {
  evt::RunConfig cfg;
  if (!a.config_path.empty()) cfg = evt::parse_config_path(a.config_path);
  if (a.seed_given) cfg.train.seed = a.seed;

  const evt::Corpus train_corpus = evt::read_column_path(a.train_path);
  const evt::Corpus dev_corpus = evt::read_column_path(a.dev_path);
  auto table = std::make_shared<evt::EmbeddingTable>(
      evt::load_text_vectors_path(a.vectors_path));

  auto [model, history] = evt::train(train_corpus, dev_corpus, std::move(table), cfg.net,
                                     cfg.train, &std::cout, a.vectors_path);
  evt::save_model(model, a.model_path);

  std::ostringstream log;
  log << "epoch,mean_nll,dev_strict_f1,dev_f1_class\n";
  char line[160];
  for (const auto& rec : history.epochs) {
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f\n", rec.epoch, rec.mean_nll,
                  rec.dev_strict_f1, rec.dev_f1_class);
    log << line;
  }
  std::snprintf(line, sizeof line, "best_epoch,%d\n", history.best_epoch);
  log << line;
  write_text_file(a.model_path + ".log", log.str());
  return kOk;
}

// ---------------------------------------------------------------------------
// tag
// ---------------------------------------------------------------------------

int run_tag(const std::string& model_path, const std::string& in_path,
            const std::string& out_path) {
  evt::TaggerModel model = evt::load_model(model_path);
  auto table = std::make_shared<evt::EmbeddingTable>(
      evt::load_text_vectors_path(model.vectors_path));
  if (static_cast<int>(table->dim) != model.config.word_dim) {
    std::ostringstream os;
    os << "vector file '" << model.vectors_path << "' has dim " << table->dim
       << " but the model expects " << model.config.word_dim;
    throw evt::FormatError(os.str());
  }
  model.embeddings = std::move(table);

  const evt::Corpus input = evt::read_column_path(in_path);
  evt::Corpus output;
  output.split_name = input.split_name;
  output.sentences.reserve(input.sentences.size());
  for (const auto& sent : input.sentences) {
    evt::Sentence tagged;
    tagged.tokens = sent.tokens;
    tagged.events = evt::predict(sent, model);
    output.sentences.push_back(std::move(tagged));
  }
  evt::write_column_path(output, out_path);
  return kOk;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

int run_score(const std::string& gold_path, const std::string& system_path,
              const std::string& format) {
  const evt::Corpus gold = evt::read_column_path(gold_path);
  const evt::Corpus system = evt::read_column_path(system_path);
  const evt::ScoreReport report = evt::score(gold, system);
  std::cout << (format == "kv" ? evt::format_report_kv(report)
                               : evt::format_report_table(report));
  return kOk;
}

// ---------------------------------------------------------------------------
// embstats
// ---------------------------------------------------------------------------

int run_embstats(const std::string& vectors_path, const std::vector<std::string>& corpora) {
  const evt::EmbeddingTable table = evt::load_text_vectors_path(vectors_path);
  for (const auto& path : corpora) {
    const evt::Corpus c = evt::read_column_path(path);
    const evt::OovReport r = evt::oov_rate(c, table);
    std::printf("%s: tokens=%ld types=%ld token_oov=%.2f%% type_oov=%.2f%%\n", path.c_str(),
                r.n_tokens, r.n_types, r.token_oov_rate, r.type_oov_rate);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

struct PanelMetrics {
  double f1 = 0.0;
  double f1_class = 0.0;
};

std::string render_f1_svg(const std::vector<std::string>& labels,
                          const std::vector<std::array<PanelMetrics, 2>>& systems) {
  const int n = static_cast<int>(systems.size());
  const double chart_h = 200.0;
  const double baseline = 250.0;
  const double bar_w = 24.0;
  const double group_w = 2 * bar_w + 22.0;
  const double panel_w = 50.0 + n * group_w + 20.0;
  const double panel_gap = 50.0;
  const double width = 2 * panel_w + panel_gap + 20.0;
  const char* panel_titles[2] = {"Strict F1", "Relaxed F1"};
  const char* bar_fill[2] = {"#4878a8", "#a85448"};

  std::string svg;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"300\" "
                "font-family=\"sans-serif\" font-size=\"11\">\n",
                width);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int panel = 0; panel < 2; ++panel) {
    const double x0 = 10.0 + panel * (panel_w + panel_gap) + 50.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.4f\" y=\"24\" font-size=\"14\">%s</text>\n",
                  x0, panel_titles[panel]);
    svg += buf;
    for (int tick = 0; tick <= 4; ++tick) {
      const double v = tick * 0.25;
      const double y = baseline - v * chart_h;
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\" "
                    "stroke=\"#cccccc\"/>\n",
                    x0 - 6.0, y, x0 + n * group_w, y);
      svg += buf;
      std::snprintf(buf, sizeof buf,
                    "<text x=\"%.4f\" y=\"%.4f\" text-anchor=\"end\">%.2f</text>\n",
                    x0 - 10.0, y + 4.0, v);
      svg += buf;
    }
    for (int i = 0; i < n; ++i) {
      const double gx = x0 + i * group_w + 8.0;
      const double values[2] = {systems[i][panel].f1, systems[i][panel].f1_class};
      for (int b = 0; b < 2; ++b) {
        const double h = values[b] * chart_h;
        const double bx = gx + b * (bar_w + 4.0);
        std::snprintf(buf, sizeof buf,
                      "<rect class=\"bar\" x=\"%.4f\" y=\"%.4f\" width=\"%.4f\" "
                      "height=\"%.4f\" fill=\"%s\"/>\n",
                      bx, baseline - h, bar_w, h, bar_fill[b]);
        svg += buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.4f\" y=\"%.4f\" text-anchor=\"middle\" "
                      "font-size=\"9\">%.3f</text>\n",
                      bx + bar_w / 2.0, baseline - h - 4.0, values[b]);
        svg += buf;
      }
      std::snprintf(buf, sizeof buf,
                    "<text x=\"%.4f\" y=\"%.4f\" text-anchor=\"middle\">%s</text>\n",
                    gx + bar_w + 2.0, baseline + 16.0, labels[i].c_str());
      svg += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.4f\" y=\"280\" font-size=\"10\">left bar: F1, right bar: "
                  "F1-class</text>\n",
                  x0);
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

int run_plot(const std::vector<std::string>& report_paths,
             const std::vector<std::string>& labels, const std::string& out_path) {
  if (report_paths.empty() || report_paths.size() != labels.size()) {
    std::cerr << "plot: need one --label per report\n";
    return kUsageError;
  }
  std::vector<std::array<PanelMetrics, 2>> systems;
  for (const auto& path : report_paths) {
    std::ifstream in(path);
    if (!in) throw evt::ParseError("cannot open '" + path + "'");
    evt::ScoreReport r;
    try {
      r = evt::parse_report_kv(in);
    } catch (const evt::ParseError& e) {
      throw evt::ParseError(path + ": " + e.what());
    }
    systems.push_back({PanelMetrics{r.strict.f1, r.strict.f1_class},
                       PanelMetrics{r.relaxed.f1, r.relaxed.f1_class}});
  }
  write_text_file(out_path, render_f1_svg(labels, systems));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evt — event detection and classification experiments"};
  app.require_subcommand(1);

  ConvertArgs conv;
  auto* convert = app.add_subcommand(
      "convert", "Validate/rewrite column files, print corpus statistics, or "
                 "generate the synthetic dataset");
  convert->add_option("--in", conv.in_path, "column file to read");
  convert->add_option("--out", conv.out_path, "column file to write");
  convert->add_option("--train", conv.train_path, "synthetic training split to write");
  convert->add_option("--dev", conv.dev_path, "synthetic development split to write");
  convert->add_option("--test", conv.test_path, "synthetic test split to write");
  convert->add_option("--vectors", conv.vectors_path, "synthetic vector file to write");
  convert->add_option("--seed", conv.seed, "generator seed");
  convert->add_option("--dim", conv.dim, "synthetic vector dimension");
  convert->add_option("--n-train", conv.n_train, "synthetic training sentences");
  convert->add_option("--n-dev", conv.n_dev, "synthetic development sentences");
  convert->add_option("--n-test", conv.n_test, "synthetic test sentences");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a tagger");
  train_cmd->add_option("--train", tr.train_path, "training column file")->required();
  train_cmd->add_option("--dev", tr.dev_path, "development column file")->required();
  train_cmd->add_option("--vectors", tr.vectors_path, "word vector file")->required();
  train_cmd->add_option("--config", tr.config_path, "key = value configuration file");
  train_cmd->add_option("--model", tr.model_path, "model file to write")->required();
  train_cmd->add_option("--seed", tr.seed, "overrides the configured seed")
      ->each([&tr](const std::string&) { tr.seed_given = true; });

  std::string tag_model, tag_in, tag_out;
  auto* tag_cmd = app.add_subcommand("tag", "Tag a column file with a trained model");
  tag_cmd->add_option("--model", tag_model, "model file")->required();
  tag_cmd->add_option("--in", tag_in, "input column file")->required();
  tag_cmd->add_option("--out", tag_out, "output column file")->required();

  std::string score_gold, score_system, score_format = "table";
  auto* score_cmd = app.add_subcommand("score", "Score a system against gold");
  score_cmd->add_option("gold", score_gold, "gold column file")->required();
  score_cmd->add_option("system", score_system, "system column file")->required();
  score_cmd->add_option("--format", score_format, "report format")
      ->check(CLI::IsMember({"table", "kv"}));

  std::string emb_vectors;
  std::vector<std::string> emb_corpora;
  auto* emb_cmd = app.add_subcommand("embstats", "Out-of-vocabulary statistics");
  emb_cmd->add_option("--vectors", emb_vectors, "word vector file")->required();
  emb_cmd->add_option("corpora", emb_corpora, "column files")->required();

  std::vector<std::string> plot_reports, plot_labels;
  std::string plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Emit a grouped-bar F1 chart as SVG");
  plot_cmd->add_option("reports", plot_reports, "kv score reports")->required();
  plot_cmd->add_option("--label", plot_labels, "one label per report");
  plot_cmd->add_option("--out", plot_out, "SVG file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (convert->parsed()) return run_convert(conv);
    if (train_cmd->parsed()) return run_train(tr);
    if (tag_cmd->parsed()) return run_tag(tag_model, tag_in, tag_out);
    if (score_cmd->parsed()) return run_score(score_gold, score_system, score_format);
    if (emb_cmd->parsed()) return run_embstats(emb_vectors, emb_corpora);
    if (plot_cmd->parsed()) return run_plot(plot_reports, plot_labels, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
