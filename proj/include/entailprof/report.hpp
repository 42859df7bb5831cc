#ifndef ENTAILPROF_REPORT_HPP_
#define ENTAILPROF_REPORT_HPP_

#include <span>
#include <string>
#include <vector>

#include "entailprof/eval.hpp"
#include "json.hpp"

namespace entailprof {

/// JSON mirror of an EvalReport (per-class F1 keyed by label).
nlohmann::ordered_json report_to_json(const EvalReport& r, const std::vector<std::string>& label_set);
EvalReport report_from_json(const nlohmann::json& j, std::vector<std::string>* label_set = nullptr);

/// `{"label_set": [...], "reports": [...]}`, newline-terminated.
std::string serialize_reports(std::span<const EvalReport> reports, const std::vector<std::string>& label_set);
std::vector<EvalReport> parse_reports(const std::string& text, std::vector<std::string>* label_set = nullptr);

/// Columns: task, model, n, selection, s, f1_mean, f1_std, acc_mean,
/// acc_std, hypotheses, best. Scores are fractions printed with 4 decimals.
std::string reports_to_csv(std::span<const EvalReport> reports);
std::string reports_to_markdown(std::span<const EvalReport> reports);

/// Metrics as `{"accuracy", "macro_f1", "per_class_f1": {label: f1}}`.
nlohmann::ordered_json metrics_to_json(const Metrics& m, const std::vector<std::string>& label_set);

}  // namespace entailprof

#endif  // ENTAILPROF_REPORT_HPP_
