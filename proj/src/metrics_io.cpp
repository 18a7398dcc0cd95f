#include "inspag/metrics_io.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "inspag/error.hpp"

namespace inspag {

const std::vector<std::string>& round_columns() {
  static const std::vector<std::string> cols = {
      "round", "trial", "k", "A_k", "M_k", "alpha_k", "f_value",
      "grad_norm", "inner_iters", "delta_k_tol", "bytes", "wall_ms"};
  return cols;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ',';
    s += parts[i];
  }
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, size_t line, const std::string& col) {
  try {
    size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw InputError(fmt::format("metrics line {}: column {} is not a number: '{}'",
                                 line, col, cell));
  }
}

}  // namespace

void write_round_csv(std::ostream& out, const std::vector<RoundRecord>& records) {
  out << join(round_columns()) << '\n';
  for (const auto& r : records) {
    out << r.round << ',' << r.trial << ',' << r.k << ',' << format_double(r.A) << ','
        << format_double(r.M) << ',' << format_double(r.alpha) << ','
        << format_double(r.f_value) << ',' << format_double(r.grad_norm) << ','
        << r.inner_iters << ',' << format_double(r.delta_k_tol) << ',' << r.bytes << ','
        << format_double(r.wall_ms) << '\n';
  }
}

void write_round_jsonl(std::ostream& out, const std::vector<RoundRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["trial"] = r.trial;
    j["k"] = r.k;
    j["A_k"] = r.A;
    j["M_k"] = r.M;
    j["alpha_k"] = r.alpha;
    j["f_value"] = r.f_value;
    j["grad_norm"] = r.grad_norm;
    j["inner_iters"] = r.inner_iters;
    j["delta_k_tol"] = r.delta_k_tol;
    j["bytes"] = r.bytes;
    j["wall_ms"] = r.wall_ms;
    j["accepted"] = r.accepted;
    j["projection_slack"] = r.projection_slack;
    out << j.dump() << '\n';
  }
}

std::vector<RoundRecord> read_round_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("metrics file is empty");
  auto header = split(line);
  std::map<std::string, size_t> pos;
  for (size_t i = 0; i < header.size(); ++i) pos[header[i]] = i;
  for (const auto& c : round_columns())
    if (!pos.count(c)) throw InputError(fmt::format("metrics header lacks column '{}'", c));
  std::vector<RoundRecord> out;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw InputError(fmt::format("metrics line {}: expected {} cells, got {}", line_no,
                                   header.size(), cells.size()));
    auto get = [&](const std::string& c) { return parse_number(cells[pos[c]], line_no, c); };
    RoundRecord r;
    r.round = static_cast<long>(get("round"));
    r.trial = static_cast<int>(get("trial"));
    r.k = static_cast<int>(get("k"));
    r.A = get("A_k");
    r.M = get("M_k");
    r.alpha = get("alpha_k");
    r.f_value = get("f_value");
    r.grad_norm = get("grad_norm");
    r.inner_iters = static_cast<long>(get("inner_iters"));
    r.delta_k_tol = get("delta_k_tol");
    r.bytes = static_cast<long>(get("bytes"));
    r.wall_ms = get("wall_ms");
    out.push_back(r);
  }
  return out;
}

const std::vector<std::string>& restart_columns() {
  static const std::vector<std::string> cols = {
      "t", "radius", "steps_planned", "steps_taken", "value", "gap", "bound", "certified"};
  return cols;
}

void write_restart_csv(std::ostream& out, const std::vector<RestartEntry>& log,
                       const std::optional<std::vector<double>>& gaps) {
  if (gaps && gaps->size() != log.size())
    throw InputError("restart gaps must match the log length");
  out << join(restart_columns()) << '\n';
  for (size_t i = 0; i < log.size(); ++i) {
    const auto& e = log[i];
    out << e.t << ',' << format_double(e.radius) << ',' << e.steps_planned << ','
        << e.steps_taken << ',' << format_double(e.value) << ',';
    if (gaps) {
      double g = (*gaps)[i];
      out << format_double(g) << ',' << format_double(e.certified) << ','
          << (g <= e.certified ? "true" : "false");
    } else {
      out << ',' << format_double(e.certified) << ',';
    }
    out << '\n';
  }
}

}  // namespace inspag
