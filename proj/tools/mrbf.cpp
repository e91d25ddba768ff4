// mrbf - invariant-moment glyph recognition: dataset generation, feature
// extraction, KNN baselines and the gated tree-RBF classifier.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrbf/pipeline.hpp"

namespace {

struct ConfigArgs {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value from --set
  std::vector<std::pair<std::string, std::string>> flag_values;
};

// Every RunConfig key becomes a --key flag; --config loads a file first and
// flags override it.
void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_file, "key=value config file");
  cmd->add_option("--set", args.overrides, "extra key=value override (repeatable)");
  for (const auto& [key, value] : mrbf::config_items(mrbf::RunConfig{})) {
    const std::string name = "--" + key;
    args.flag_values.emplace_back(key, "");
    auto* slot = &args.flag_values.back().second;
    cmd->add_option(name, *slot, "config key " + key + " (default " + value + ")");
  }
}

mrbf::RunConfig resolve_config(const ConfigArgs& args) {
  mrbf::RunConfig cfg;
  if (!args.config_file.empty()) mrbf::load_config_file(cfg, args.config_file);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
    mrbf::config_set(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [key, value] : args.flag_values)
    if (!value.empty()) mrbf::config_set(cfg, key, value);
  return cfg;
}

void echo_config(std::ostream& os, const mrbf::RunConfig& cfg) {
  for (const auto& [k, v] : mrbf::config_items(cfg)) os << "cfg." << k << "=" << v << "\n";
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + out_path);
  os << text;
}

std::string report_text(const mrbf::EvalReport& report, const mrbf::RunConfig& cfg,
                        bool machine) {
  std::ostringstream os;
  if (machine) {
    os << mrbf::render_report(report, mrbf::ReportFormat::machine);
    echo_config(os, cfg);
  } else {
    os << mrbf::render_report(report, mrbf::ReportFormat::plain_table);
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invariant-moment glyph recognition (KNN + gated tree RBF)"};
  app.require_subcommand(1);

  // gen-dataset
  auto* gen = app.add_subcommand("gen-dataset", "render a synthetic glyph corpus");
  ConfigArgs gen_args;
  std::string gen_out;
  gen->add_option("--out", gen_out, "output directory")->required();
  add_config_options(gen, gen_args);

  // extract
  auto* extract = app.add_subcommand("extract", "extract a feature dump from a manifest");
  ConfigArgs ex_args;
  std::string ex_manifest, ex_out;
  extract->add_option("--manifest", ex_manifest, "dataset manifest")->required();
  extract->add_option("--out", ex_out, "output dump path")->required();
  add_config_options(extract, ex_args);

  // knn-eval
  auto* knn = app.add_subcommand("knn-eval", "evaluate the KNN baseline");
  ConfigArgs knn_args;
  std::string knn_train, knn_test, knn_report_out;
  bool knn_machine = false;
  knn->add_option("--train", knn_train, "train manifest or feature dump")->required();
  knn->add_option("--test", knn_test, "test manifest or feature dump")->required();
  knn->add_option("--report", knn_report_out, "write the report here instead of stdout");
  knn->add_flag("--machine", knn_machine, "machine-readable key=value report");
  add_config_options(knn, knn_args);

  // train
  auto* train = app.add_subcommand("train", "train the tree RBF classifier");
  ConfigArgs train_args;
  std::string train_manifest, train_model;
  train->add_option("--manifest", train_manifest, "train manifest")->required();
  train->add_option("--model", train_model, "output model path")->required();
  add_config_options(train, train_args);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a trained model");
  ConfigArgs eval_args;
  std::string eval_model, eval_manifest, eval_report_out;
  bool eval_machine = false;
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--test", eval_manifest, "test manifest")->required();
  eval->add_option("--report", eval_report_out, "write the report here instead of stdout");
  eval->add_flag("--machine", eval_machine, "machine-readable key=value report");
  add_config_options(eval, eval_args);

  // predict
  auto* predict = app.add_subcommand("predict", "classify one image");
  ConfigArgs pred_args;
  std::string pred_model, pred_image;
  predict->add_option("--model", pred_model, "model file")->required();
  predict->add_option("--image", pred_image, "PGM image")->required();
  add_config_options(predict, pred_args);

  // inspect-moments
  auto* inspect = app.add_subcommand("inspect-moments", "print moments and descriptors");
  ConfigArgs ins_args;
  std::string ins_image;
  inspect->add_option("--image", ins_image, "PGM image")->required();
  add_config_options(inspect, ins_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const mrbf::RunConfig cfg = resolve_config(gen_args);
      const auto out = mrbf::gen_dataset(cfg, gen_out);
      std::cout << "train_manifest=" << out.train_manifest << "\n"
                << "test_manifest=" << out.test_manifest << "\n"
                << "train_rows=" << out.train_rows << "\n"
                << "test_rows=" << out.test_rows << "\n";
      echo_config(std::cout, cfg);
    } else if (extract->parsed()) {
      const mrbf::RunConfig cfg = resolve_config(ex_args);
      mrbf::cmd_extract(ex_manifest, mrbf::feature_kind_from_name(cfg.kind), cfg, ex_out);
      std::cout << "dump=" << ex_out << "\n";
      echo_config(std::cout, cfg);
    } else if (knn->parsed()) {
      const mrbf::RunConfig cfg = resolve_config(knn_args);
      const auto out =
          mrbf::knn_eval(knn_train, knn_test, mrbf::feature_kind_from_name(cfg.kind), cfg);
      write_or_print(report_text(out.report, cfg, knn_machine), knn_report_out);
    } else if (train->parsed()) {
      const mrbf::RunConfig cfg = resolve_config(train_args);
      const mrbf::TreeNetwork tree = mrbf::cmd_train(train_manifest, cfg);
      mrbf::save_tree(tree, train_model);
      std::cout << "model=" << train_model << "\n";
      for (std::size_t i = 0; i < tree.branches.size(); ++i)
        std::cout << "branch." << tree.group_table.groups[i].id << ".units="
                  << tree.branches[i].centers.size() << "\n";
      echo_config(std::cout, cfg);
    } else if (eval->parsed()) {
      const mrbf::RunConfig cfg = resolve_config(eval_args);
      const mrbf::TreeNetwork tree = mrbf::load_tree(eval_model);
      const auto out = mrbf::evaluate_tree(tree, eval_manifest, cfg);
      std::ostringstream os;
      if (eval_machine) {
        os << report_text(out.tree_report, cfg, true);
      } else {
        os << "Tree RBF classifier\n" << mrbf::render_report(out.tree_report,
                                                             mrbf::ReportFormat::plain_table);
        os << "\nFlat KNN baseline (full descriptor)\n"
           << mrbf::render_report(out.baseline_report, mrbf::ReportFormat::plain_table);
      }
      write_or_print(os.str(), eval_report_out);
    } else if (predict->parsed()) {
      const mrbf::RunConfig cfg = resolve_config(pred_args);
      (void)cfg;
      const mrbf::TreeNetwork tree = mrbf::load_tree(pred_model);
      const auto pred = mrbf::cmd_predict(tree, pred_image);
      std::cout << "label=" << pred.result.label << "\n"
                << "category=" << mrbf::category_name(pred.result.category) << "\n"
                << "group=" << pred.result.group << "\n";
      for (int i = 0; i < 26; ++i)
        if (std::isfinite(pred.result.scores[i]))
          std::cout << "score." << static_cast<char>('a' + i) << "=" << pred.result.scores[i]
                    << "\n";
    } else if (inspect->parsed()) {
      const mrbf::RunConfig cfg = resolve_config(ins_args);
      const mrbf::BinaryImage img = mrbf::load_pgm(ins_image);
      std::cout << mrbf::inspect_moments_text(img, cfg.paper_literal_h1);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
