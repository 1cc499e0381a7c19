#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bagl/matrix.hpp"
#include "bagl/year_month.hpp"

namespace bagl {

/// Dated n x p matrix of decimal monthly returns (rows = months).
class ReturnPanel {
 public:
  ReturnPanel() = default;
  /// Throws DataError unless dates are strictly increasing, the shape matches
  /// and every value is finite.
  ReturnPanel(std::vector<YearMonth> dates, std::vector<std::string> assets, Matrix values);

  [[nodiscard]] Index n() const { return values_.rows(); }
  [[nodiscard]] Index p() const { return values_.cols(); }
  [[nodiscard]] const std::vector<YearMonth>& dates() const { return dates_; }
  [[nodiscard]] const std::vector<std::string>& assets() const { return assets_; }
  [[nodiscard]] const Matrix& values() const { return values_; }

  /// Row index of `date`, or -1.
  [[nodiscard]] Index row_of(const YearMonth& date) const;
  /// Rows whose dates fall in [first, last].
  [[nodiscard]] ReturnPanel slice(const YearMonth& first, const YearMonth& last) const;
  /// Same dates and values restricted to the given columns, in order.
  [[nodiscard]] ReturnPanel select_columns(const std::vector<Index>& columns) const;

 private:
  std::vector<YearMonth> dates_;
  std::vector<std::string> assets_;
  Matrix values_;
};

struct FactorPanel {
  std::vector<YearMonth> dates;
  Vector mkt_rf;
  Vector smb;
  Vector hml;
  Vector rf;

  [[nodiscard]] Index n() const { return static_cast<Index>(dates.size()); }
  [[nodiscard]] Index row_of(const YearMonth& date) const;
  void validate() const;
};

struct ScatterMatrix {
  SymmetricMatrix s;
  Index n_obs = 0;
};

struct ParseResult {
  ReturnPanel panel;
  std::vector<std::string> warnings;
};

/// Reads the first monthly block of a French data library file. Rows look
/// like "YYYYMM v1 ... vp" (comma or whitespace separated) with values in
/// percent; asset names come from the header line preceding the first data
/// row. Rows carrying the missing-value code (-99.99 or -999) are dropped with
/// a warning. Throws DataError on malformed stamps, ragged rows or an empty
/// result.
ParseResult parse_french_returns(std::istream& in);
ParseResult parse_french_returns_file(const std::string& path);

/// Reads a Fama-French three-factor file (Mkt-RF, SMB, HML, RF in percent),
/// first monthly block only.
FactorPanel parse_french_factors(std::istream& in);
FactorPanel parse_french_factors_file(const std::string& path);

struct ResidualizeOptions {
  /// Regress r - rf (true) or raw r (false).
  bool excess_returns = true;
};

/// Per-asset OLS of returns on (1, mkt_rf, smb, hml) over the whole panel;
/// returns the residual panel with the same dates and assets.
ReturnPanel residualize(const ReturnPanel& returns, const FactorPanel& factors, ResidualizeOptions options = {});

/// The `length` consecutive rows ending at `end_date`.
ReturnPanel window(const ReturnPanel& panel, const YearMonth& end_date, Index length);

/// S = R'R, no centering.
ScatterMatrix scatter(const ReturnPanel& panel);

/// "date,asset1,...,assetp" with YYYYMM dates and round-trip decimal values.
void write_panel_csv(std::ostream& out, const ReturnPanel& panel);
void write_panel_csv(const std::string& path, const ReturnPanel& panel);
ReturnPanel read_panel_csv(std::istream& in);
ReturnPanel read_panel_csv(const std::string& path);

}  // namespace bagl
