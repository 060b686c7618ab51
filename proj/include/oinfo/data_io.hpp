#pragma once

#include "oinfo/rng.hpp"
#include "oinfo/systems.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace oinfo {

enum class PayloadFormat { Csv, F32, F64 };

const char* to_string(PayloadFormat format);
PayloadFormat parse_payload_format(const std::string& text);

/// Writes `<stem>.json` (header) next to its payload. The header records
/// n_samples, total_dim, partition dims, optional column names, the
/// standardization record and the payload file name and encoding.
/// CSV payloads carry a header row and 17 significant digits; binary payloads
/// are little-endian row-major.
void save_dataset(const std::string& header_path, const Dataset& data, PayloadFormat format = PayloadFormat::F32,
                  const std::vector<std::string>& column_names = {});

/// Loads a header file, or a bare CSV (optional header row). A partition
/// override replaces the stored one (bare CSVs default to one variable per
/// column). Rejects non-finite values with their row and column.
Dataset load_dataset(const std::string& path, const std::optional<std::vector<std::size_t>>& partition = std::nullopt);

/// Zero mean, unit (population) variance per column; the (mean, scale)
/// record is stored on the result. Columns with std <= 1e-12 are rejected.
Dataset standardize(const Dataset& data);

/// Applies an existing record, e.g. the training set's to a test set.
Dataset apply_standardization(const Dataset& data, const Standardization& record);

/// Inverse of standardize; clears the record.
Dataset unstandardize(const Dataset& data);

/// Random disjoint split; the train part holds round(fraction * M) rows.
/// Rows keep their original relative order inside each part.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, RngStream& rng);

/// Rows [begin, begin + count).
Dataset take_rows(const Dataset& data, std::size_t begin, std::size_t count);

}  // namespace oinfo
