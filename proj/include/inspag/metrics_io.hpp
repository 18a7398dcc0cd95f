#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "inspag/hyperfast.hpp"
#include "inspag/inspag.hpp"

namespace inspag {

// Fixed column order of the per-round CSV.
const std::vector<std::string>& round_columns();

// 17 significant digits, so the value round-trips.
std::string format_double(double v);

void write_round_csv(std::ostream& out, const std::vector<RoundRecord>& records);
void write_round_jsonl(std::ostream& out, const std::vector<RoundRecord>& records);
// Requires every column of round_columns() in the header (any order).
std::vector<RoundRecord> read_round_csv(std::istream& in);

const std::vector<std::string>& restart_columns();

// gaps, when given, are f(z_t) - f* per restart; the certified column is
// then gap <= bound, otherwise left empty.
void write_restart_csv(std::ostream& out, const std::vector<RestartEntry>& log,
                       const std::optional<std::vector<double>>& gaps);

}  // namespace inspag
