#include "boq/curves.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "boq/csv.hpp"
#include "boq/error.hpp"

namespace boq {

std::vector<bool> overfit_flags(const std::vector<EpochRecord>& history) {
  std::vector<bool> flags(history.size(), false);
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i - 1].dev_loss < history[best].dev_loss) best = i - 1;
    flags[i] = history[i].dev_loss - history[best].dev_loss >= 0.1 &&
               history[i].train_loss < history[best].train_loss;
  }
  return flags;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& s, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "not a number: '" + s + "'");
  }
}

}  // namespace

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out << "epoch,train_loss,train_acc,dev_loss,dev_acc,overfit\n";
  auto flags = overfit_flags(history);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& r = history[i];
    out << r.epoch << ',' << num(r.train_loss) << ',' << num(r.train_acc) << ',' << num(r.dev_loss) << ','
        << num(r.dev_acc) << ',' << (flags[i] ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<EpochRecord> parse_history_csv(const std::string& text) {
  std::istringstream in(text);
  auto rows = csv::read_all(in);
  if (rows.empty() || rows.front().fields.size() < 5 || rows.front().fields[0] != "epoch")
    throw SchemaError("history CSV must start with epoch,train_loss,train_acc,dev_loss,dev_acc");
  std::vector<EpochRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (f.size() < 5) throw ParseError(rows[i].line, "expected at least 5 fields");
    EpochRecord r;
    r.epoch = static_cast<int>(parse_num(f[0], rows[i].line));
    r.train_loss = parse_num(f[1], rows[i].line);
    r.train_acc = parse_num(f[2], rows[i].line);
    r.dev_loss = parse_num(f[3], rows[i].line);
    r.dev_acc = parse_num(f[4], rows[i].line);
    out.push_back(r);
  }
  return out;
}

std::string oob_csv(const std::vector<OobPoint>& points) {
  std::ostringstream out;
  out << "trees,oob_error\n";
  for (const auto& p : points) out << p.trees << ',' << num(p.error) << '\n';
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace boq
