#include "entailprof/report.hpp"

#include <cstdio>
#include <sstream>

#include "entailprof/common.hpp"
#include "entailprof/jsonl.hpp"

namespace entailprof {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json metrics_to_json(const Metrics& m, const std::vector<std::string>& label_set) {
  ordered_json j;
  j["accuracy"] = m.accuracy;
  j["macro_f1"] = m.macro_f1;
  ordered_json per = ordered_json::object();
  for (std::size_t c = 0; c < m.per_class_f1.size(); ++c) {
    per[c < label_set.size() ? label_set[c] : std::to_string(c)] = m.per_class_f1[c];
  }
  j["per_class_f1"] = std::move(per);
  return j;
}

namespace {

Metrics metrics_from_json(const json& j, const std::vector<std::string>& label_set) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.macro_f1 = j.at("macro_f1").get<double>();
  const auto& per = j.at("per_class_f1");
  for (const auto& l : label_set) m.per_class_f1.push_back(per.at(l).get<double>());
  return m;
}

std::string fixed4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> row_cells(const EvalReport& r) {
  return {r.task,
          r.model,
          std::to_string(r.n),
          r.selection,
          std::to_string(r.s),
          fixed4(r.mean.macro_f1),
          fixed4(r.std.macro_f1),
          fixed4(r.mean.accuracy),
          fixed4(r.std.accuracy),
          r.hypotheses,
          r.best ? "yes" : ""};
}

const std::vector<std::string> kColumns = {"task",     "model",    "n",       "selection",  "s",   "f1_mean",
                                           "f1_std",   "acc_mean", "acc_std", "hypotheses", "best"};

}  // namespace

ordered_json report_to_json(const EvalReport& r, const std::vector<std::string>& label_set) {
  ordered_json j;
  j["task"] = r.task;
  j["model"] = r.model;
  j["selection"] = r.selection;
  j["hypotheses"] = r.hypotheses;
  j["n"] = r.n;
  j["s"] = r.s;
  j["per_fold_s"] = r.per_fold_s;
  ordered_json folds = ordered_json::array();
  for (const auto& m : r.per_fold) folds.push_back(metrics_to_json(m, label_set));
  j["per_fold"] = std::move(folds);
  j["mean"] = metrics_to_json(r.mean, label_set);
  j["std"] = metrics_to_json(r.std, label_set);
  j["std_kind"] = "population";
  j["best"] = r.best;
  return j;
}

EvalReport report_from_json(const json& j, std::vector<std::string>* label_set) {
  std::vector<std::string> labels;
  for (const auto& [k, v] : j.at("mean").at("per_class_f1").items()) labels.push_back(k);
  if (label_set && !label_set->empty()) labels = *label_set;
  EvalReport r;
  r.task = j.at("task").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.selection = j.at("selection").get<std::string>();
  r.hypotheses = j.at("hypotheses").get<std::string>();
  r.n = j.at("n").get<std::size_t>();
  r.s = j.at("s").get<std::size_t>();
  r.per_fold_s = j.at("per_fold_s").get<std::vector<std::size_t>>();
  for (const auto& m : j.at("per_fold")) r.per_fold.push_back(metrics_from_json(m, labels));
  r.mean = metrics_from_json(j.at("mean"), labels);
  r.std = metrics_from_json(j.at("std"), labels);
  r.best = j.value("best", false);
  if (label_set && label_set->empty()) *label_set = labels;
  return r;
}

std::string serialize_reports(std::span<const EvalReport> reports, const std::vector<std::string>& label_set) {
  ordered_json doc;
  doc["label_set"] = label_set;
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r, label_set));
  doc["reports"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<EvalReport> parse_reports(const std::string& text, std::vector<std::string>* label_set) {
  const json doc = parse_json_document(text, "report file");
  try {
    std::vector<std::string> labels = doc.at("label_set").get<std::vector<std::string>>();
    std::vector<EvalReport> out;
    for (const auto& r : doc.at("reports")) out.push_back(report_from_json(r, &labels));
    if (label_set) *label_set = labels;
    return out;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report file: ") + e.what());
  }
}

std::string reports_to_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  for (std::size_t c = 0; c < kColumns.size(); ++c) out << (c ? "," : "") << kColumns[c];
  out << '\n';
  for (const auto& r : reports) {
    const auto cells = row_cells(r);
    for (std::size_t c = 0; c < cells.size(); ++c) out << (c ? "," : "") << csv_field(cells[c]);
    out << '\n';
  }
  return out.str();
}

std::string reports_to_markdown(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << '|';
  for (const auto& c : kColumns) out << ' ' << c << " |";
  out << "\n|";
  for (std::size_t c = 0; c < kColumns.size(); ++c) out << "---|";
  out << '\n';
  for (const auto& r : reports) {
    out << '|';
    for (const auto& cell : row_cells(r)) out << ' ' << cell << " |";
    out << '\n';
  }
  return out.str();
}

}  // namespace entailprof
