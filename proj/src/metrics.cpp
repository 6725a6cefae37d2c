#include "boq/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "boq/error.hpp"

namespace boq {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, std::size_t n_classes) {
  if (y_true.size() != y_pred.size()) throw ContractError("confusion: label lists differ in length");
  ConfusionMatrix cm(n_classes);
  for (std::size_t k = 0; k < y_true.size(); ++k) {
    const int t = y_true[k], p = y_pred[k];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= n_classes || static_cast<std::size_t>(p) >= n_classes)
      throw ContractError("confusion: label outside [0, " + std::to_string(n_classes) + ")");
    ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm, const std::vector<std::string>& labels) {
  const std::size_t c = cm.n_classes;
  if (cm.counts.size() != c * c) throw ContractError("confusion matrix storage does not match its size");
  if (!labels.empty() && labels.size() != c) throw ContractError("one label name per class required");
  const std::uint64_t total = cm.total();
  if (total == 0) throw UndefinedResultError("metrics of an empty confusion matrix");

  MetricsReport r;
  r.confusion = cm;
  std::uint64_t trace = 0;
  double f1_sum = 0.0;
  std::size_t averaged = 0;
  for (std::size_t i = 0; i < c; ++i) {
    ClassMetrics m;
    m.label = labels.empty() ? std::to_string(i) : labels[i];
    const std::uint64_t tp = cm.at(i, i);
    for (std::size_t j = 0; j < c; ++j) {
      m.support += cm.at(i, j);
      m.predicted += cm.at(j, i);
    }
    trace += tp;
    m.in_macro = m.support > 0 || m.predicted > 0;
    if (m.predicted > 0) {
      m.precision = static_cast<double>(tp) / static_cast<double>(m.predicted);
    } else if (m.in_macro) {
      r.notes.push_back("class " + m.label + ": no predictions, precision set to 0");
    }
    if (m.support > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(m.support);
    } else if (m.in_macro) {
      r.notes.push_back("class " + m.label + ": no true records, recall set to 0");
    }
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else if (m.in_macro) {
      r.notes.push_back("class " + m.label + ": precision and recall are 0, F1 set to 0");
    }
    if (m.in_macro) {
      f1_sum += m.f1;
      ++averaged;
    } else {
      r.notes.push_back("class " + m.label + ": absent from true and predicted labels, left out of macro F1");
    }
    r.per_class.push_back(std::move(m));
  }
  r.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  r.macro_f1 = f1_sum / static_cast<double>(averaged);
  return r;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& m : per_class)
    classes.push_back({{"label", m.label}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                       {"support", m.support}, {"predicted", m.predicted}, {"in_macro", m.in_macro}});
  return {{"scope", scope},
          {"accuracy", accuracy},
          {"macro_f1", macro_f1},
          {"per_class", classes},
          {"confusion", {{"n_classes", confusion.n_classes}, {"counts", confusion.counts}}},
          {"notes", notes}};
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.scope = j.at("scope").get<std::string>();
  r.accuracy = j.at("accuracy").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  for (const auto& e : j.at("per_class")) {
    ClassMetrics m;
    m.label = e.at("label").get<std::string>();
    m.precision = e.at("precision").get<double>();
    m.recall = e.at("recall").get<double>();
    m.f1 = e.at("f1").get<double>();
    m.support = e.at("support").get<std::uint64_t>();
    m.predicted = e.at("predicted").get<std::uint64_t>();
    m.in_macro = e.at("in_macro").get<bool>();
    r.per_class.push_back(std::move(m));
  }
  r.confusion.n_classes = j.at("confusion").at("n_classes").get<std::size_t>();
  r.confusion.counts = j.at("confusion").at("counts").get<std::vector<std::uint64_t>>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

std::string MetricsReport::to_table() const {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %9s %9s %9s %9s\n", "label", "precision", "recall", "f1", "support");
  out << buf;
  for (const auto& m : per_class) {
    std::snprintf(buf, sizeof buf, "%-12s %9.4f %9.4f %9.4f %9llu\n", m.label.c_str(), m.precision, m.recall,
                  m.f1, static_cast<unsigned long long>(m.support));
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "\nscope     %s\naccuracy  %.4f\nmacro F1  %.4f\nrecords   %llu\n",
                scope.c_str(), accuracy, macro_f1, static_cast<unsigned long long>(confusion.total()));
  out << buf;
  for (const auto& n : notes) out << "note: " << n << '\n';
  return out.str();
}

}  // namespace boq
