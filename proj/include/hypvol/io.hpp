#pragma once

// JSON and CSV rendering shared by the command-line tool and the tests.
//
// Report values carry 12 significant digits. Certificates additionally hold
// an "exact" block with round-trip precision so that re-validation after a
// file round trip is not limited by the printed digits.

#include "hypvol/bounds.hpp"
#include "hypvol/smear.hpp"
#include "hypvol/volume.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hypvol::io {

using Json = nlohmann::ordered_json;

inline constexpr int kReportDigits = 12;

/// x rounded to the given number of significant digits (non-finite values
/// are returned unchanged).
double round_sig(double x, int digits = kReportDigits);

/// Decimal text with the given significant digits, '.' separator, no grouping.
std::string format_number(double x, int digits = kReportDigits);

/// Compact JSON text followed by a newline.
std::string dump(const Json& j);

Json to_json(const VolumeConstants& v);
Json to_json(const VLEstimate& e);
Json to_json(const GapCertificate& c);

/// Reads a certificate written by to_json; exact values are preferred over
/// the rounded report fields when present.
GapCertificate certificate_from_json(const Json& j);

/// Minimal CSV table: header row plus numeric or text cells.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(const std::vector<double>& values);
    void add_text_row(const std::vector<std::string>& cells);
    std::size_t rows() const { return rows_.size(); }
    /// LF line endings; numbers with 12 significant digits.
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::string> rows_;
};

}  // namespace hypvol::io
