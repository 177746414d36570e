#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "qiniup/dataset.hpp"

namespace qiniup {

/// Reads a comma-separated file with a header row. The treatment and outcome
/// columns must hold 0/1; every other column becomes a numeric feature, in
/// file order. Errors carry the 1-based data row and the column name.
UpliftDataset load_csv(const std::filesystem::path& path, const std::string& treatment_col,
                       const std::string& outcome_col);

UpliftDataset read_csv(std::istream& in, const std::string& treatment_col,
                       const std::string& outcome_col);

/// Writes features, then treatment and outcome columns, with round-trip precision.
void write_csv(std::ostream& out, const UpliftDataset& ds, const std::string& treatment_col = "t",
               const std::string& outcome_col = "y");
void save_csv(const std::filesystem::path& path, const UpliftDataset& ds,
              const std::string& treatment_col = "t", const std::string& outcome_col = "y");

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace qiniup
