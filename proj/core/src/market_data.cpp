#include "bagl/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bagl/errors.hpp"

namespace bagl {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  if (line.find(',') != std::string::npos) {
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      out.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
  } else {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
  }
  return out;
}

bool is_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool try_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto res = std::from_chars(first, s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool is_missing_code(double v) { return std::abs(v + 99.99) < 1e-9 || std::abs(v + 999.0) < 1e-9; }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// One monthly block of a French library file.
struct RawBlock {
  std::vector<std::string> header;
  std::vector<YearMonth> dates;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> warnings;
};

RawBlock read_first_monthly_block(std::istream& in) {
  RawBlock block;
  std::vector<std::string> last_text_line;
  bool in_data = false;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    const bool blank = fields.empty() || std::all_of(fields.begin(), fields.end(), [](auto& f) { return f.empty(); });
    const bool numeric_stamp = !blank && is_digits(fields[0]);
    if (!numeric_stamp) {
      if (in_data) break;
      if (!blank) last_text_line = fields;
      continue;
    }
    if (fields[0].size() != 6) {
      if (in_data && fields[0].size() == 4) break;  // annual block follows
      throw DataError("line " + std::to_string(line_no) + ": malformed date stamp '" + fields[0] + "'");
    }
    const YearMonth date = YearMonth::parse(fields[0]);
    if (!in_data) {
      in_data = true;
      width = fields.size();
      block.header = last_text_line;
    }
    if (fields.size() != width)
      throw DataError("line " + std::to_string(line_no) + ": ragged row with " + std::to_string(fields.size() - 1) +
                      " values, expected " + std::to_string(width - 1));
    std::vector<double> values(width - 1);
    bool missing = false;
    for (std::size_t k = 1; k < width; ++k) {
      if (!try_number(fields[k], values[k - 1]))
        throw DataError("line " + std::to_string(line_no) + ": not a number '" + fields[k] + "'");
      missing = missing || is_missing_code(values[k - 1]);
    }
    if (missing) {
      block.warnings.push_back("dropped " + date.compact() + ": missing-value code");
      continue;
    }
    block.dates.push_back(date);
    block.rows.push_back(std::move(values));
  }
  if (!in_data) throw DataError("no monthly data rows found");
  return block;
}

std::vector<std::string> column_names(const RawBlock& block, std::size_t p, std::vector<std::string>& warnings) {
  std::vector<std::string> h = block.header;
  if (!h.empty() && (h.front().empty() || h.size() == p + 1)) h.erase(h.begin());
  if (h.size() == p) return h;
  warnings.push_back("header does not name " + std::to_string(p) + " columns; using generated names");
  std::vector<std::string> names;
  for (std::size_t k = 0; k < p; ++k) names.push_back("A" + std::to_string(k + 1));
  return names;
}

}  // namespace

ReturnPanel::ReturnPanel(std::vector<YearMonth> dates, std::vector<std::string> assets, Matrix values)
    : dates_(std::move(dates)), assets_(std::move(assets)), values_(std::move(values)) {
  if (static_cast<Index>(dates_.size()) != values_.rows())
    throw DataError("panel has " + std::to_string(dates_.size()) + " dates but " + std::to_string(values_.rows()) +
                    " rows");
  if (static_cast<Index>(assets_.size()) != values_.cols())
    throw DataError("panel has " + std::to_string(assets_.size()) + " asset names but " +
                    std::to_string(values_.cols()) + " columns");
  if (values_.rows() < 1 || values_.cols() < 1) throw DataError("panel is empty");
  for (std::size_t t = 1; t < dates_.size(); ++t)
    if (!(dates_[t - 1] < dates_[t]))
      throw DataError("panel dates not strictly increasing at " + dates_[t].compact());
  if (!values_.allFinite()) throw DataError("panel contains non-finite values");
}

Index ReturnPanel::row_of(const YearMonth& date) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), date);
  if (it == dates_.end() || !(*it == date)) return -1;
  return static_cast<Index>(it - dates_.begin());
}

ReturnPanel ReturnPanel::slice(const YearMonth& first, const YearMonth& last) const {
  const auto b = std::lower_bound(dates_.begin(), dates_.end(), first);
  const auto e = std::upper_bound(dates_.begin(), dates_.end(), last);
  const auto r0 = static_cast<Index>(b - dates_.begin());
  const auto r1 = static_cast<Index>(e - dates_.begin());
  if (r1 <= r0) throw DataError("no rows between " + first.compact() + " and " + last.compact());
  return ReturnPanel(std::vector<YearMonth>(b, e), assets_, values_.middleRows(r0, r1 - r0));
}

ReturnPanel ReturnPanel::select_columns(const std::vector<Index>& columns) const {
  Matrix v(n(), static_cast<Index>(columns.size()));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] < 0 || columns[k] >= p()) throw DataError("column index out of range");
    v.col(static_cast<Index>(k)) = values_.col(columns[k]);
    names.push_back(assets_[columns[k]]);
  }
  return ReturnPanel(dates_, std::move(names), std::move(v));
}

Index FactorPanel::row_of(const YearMonth& date) const {
  auto it = std::lower_bound(dates.begin(), dates.end(), date);
  if (it == dates.end() || !(*it == date)) return -1;
  return static_cast<Index>(it - dates.begin());
}

void FactorPanel::validate() const {
  const Index n = this->n();
  if (n < 1) throw DataError("factor panel is empty");
  if (mkt_rf.size() != n || smb.size() != n || hml.size() != n || rf.size() != n)
    throw DataError("factor columns have inconsistent lengths");
  for (std::size_t t = 1; t < dates.size(); ++t)
    if (!(dates[t - 1] < dates[t])) throw DataError("factor dates not strictly increasing at " + dates[t].compact());
}

ParseResult parse_french_returns(std::istream& in) {
  RawBlock block = read_first_monthly_block(in);
  if (block.rows.empty()) throw DataError("panel is empty after dropping missing rows");
  const std::size_t p = block.rows.front().size();
  if (p == 0) throw DataError("data rows carry no values");
  ParseResult result;
  result.warnings = std::move(block.warnings);
  auto names = column_names(block, p, result.warnings);
  Matrix values(static_cast<Index>(block.rows.size()), static_cast<Index>(p));
  for (std::size_t t = 0; t < block.rows.size(); ++t)
    for (std::size_t k = 0; k < p; ++k) values(static_cast<Index>(t), static_cast<Index>(k)) = block.rows[t][k] / 100.0;
  result.panel = ReturnPanel(std::move(block.dates), std::move(names), std::move(values));
  return result;
}

ParseResult parse_french_returns_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open returns file '" + path + "'");
  return parse_french_returns(in);
}

FactorPanel parse_french_factors(std::istream& in) {
  RawBlock block = read_first_monthly_block(in);
  if (block.rows.empty()) throw DataError("factor panel is empty after dropping missing rows");
  const std::size_t width = block.rows.front().size();
  std::vector<std::string> warnings;
  auto names = column_names(block, width, warnings);
  auto find = [&](const std::string& want, std::size_t fallback) -> std::size_t {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (lower(names[k]) == want) return k;
    if (fallback >= width) throw DataError("factor file lacks column '" + want + "'");
    return fallback;
  };
  const std::size_t c_mkt = find("mkt-rf", 0), c_smb = find("smb", 1), c_hml = find("hml", 2), c_rf = find("rf", 3);
  FactorPanel f;
  const auto n = static_cast<Index>(block.rows.size());
  f.dates = std::move(block.dates);
  f.mkt_rf.resize(n);
  f.smb.resize(n);
  f.hml.resize(n);
  f.rf.resize(n);
  for (Index t = 0; t < n; ++t) {
    const auto& r = block.rows[static_cast<std::size_t>(t)];
    f.mkt_rf[t] = r[c_mkt] / 100.0;
    f.smb[t] = r[c_smb] / 100.0;
    f.hml[t] = r[c_hml] / 100.0;
    f.rf[t] = r[c_rf] / 100.0;
  }
  f.validate();
  return f;
}

FactorPanel parse_french_factors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open factor file '" + path + "'");
  return parse_french_factors(in);
}

ReturnPanel residualize(const ReturnPanel& returns, const FactorPanel& factors, ResidualizeOptions options) {
  factors.validate();
  const Index n = returns.n();
  if (n < 5) throw DataError("residualization needs at least 5 observations, got " + std::to_string(n));
  Matrix x(n, 4);
  Vector rf(n);
  for (Index t = 0; t < n; ++t) {
    const auto& date = returns.dates()[static_cast<std::size_t>(t)];
    const Index k = factors.row_of(date);
    if (k < 0) throw DataError("factor data missing for " + date.compact());
    x(t, 0) = 1.0;
    x(t, 1) = factors.mkt_rf[k];
    x(t, 2) = factors.smb[k];
    x(t, 3) = factors.hml[k];
    rf[t] = factors.rf[k];
  }
  Matrix y = returns.values();
  if (options.excess_returns) y.colwise() -= rf;

  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-12);
  if (qr.rank() < 4) throw DataError("factor regressors are singular (rank " + std::to_string(qr.rank()) + ")");
  const Matrix beta = qr.solve(y);
  Matrix resid = y - x * beta;
  return ReturnPanel(returns.dates(), returns.assets(), std::move(resid));
}

ReturnPanel window(const ReturnPanel& panel, const YearMonth& end_date, Index length) {
  if (length < 1) throw ConfigError("window length must be positive");
  const Index end = panel.row_of(end_date);
  if (end < 0) throw DataError("window end " + end_date.compact() + " not in panel");
  const Index begin = end - length + 1;
  if (begin < 0)
    throw DataError("insufficient history: need " + std::to_string(length) + " rows ending " + end_date.compact() +
                    ", have " + std::to_string(end + 1));
  const auto& d = panel.dates();
  if (months_between(d[static_cast<std::size_t>(begin)], end_date) != length - 1)
    throw DataError("window ending " + end_date.compact() + " is not consecutive months");
  return ReturnPanel(std::vector<YearMonth>(d.begin() + begin, d.begin() + end + 1), panel.assets(),
                     panel.values().middleRows(begin, length));
}

ScatterMatrix scatter(const ReturnPanel& panel) {
  const Matrix& r = panel.values();
  if (r.rows() < 1) throw DataError("scatter of empty panel");
  Matrix s = Matrix::Zero(r.cols(), r.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(r.transpose());
  SymmetricMatrix out(r.cols());
  for (Index i = 0; i < r.cols(); ++i)
    for (Index j = 0; j <= i; ++j) out.set(i, j, s(i, j));
  return {std::move(out), r.rows()};
}

void write_panel_csv(std::ostream& out, const ReturnPanel& panel) {
  out << "date";
  for (const auto& a : panel.assets()) out << ',' << a;
  out << '\n';
  for (Index t = 0; t < panel.n(); ++t) {
    out << panel.dates()[static_cast<std::size_t>(t)].compact();
    for (Index k = 0; k < panel.p(); ++k) out << ',' << format_double(panel.values()(t, k));
    out << '\n';
  }
}

void write_panel_csv(const std::string& path, const ReturnPanel& panel) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_panel_csv(out, panel);
}

ReturnPanel read_panel_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("panel file is empty");
  auto header = split_fields(line);
  if (header.size() < 2 || lower(header[0]) != "date") throw DataError("panel header must start with 'date'");
  std::vector<std::string> assets(header.begin() + 1, header.end());
  std::vector<YearMonth> dates;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    auto f = split_fields(line);
    if (f.empty()) continue;
    if (f.size() != header.size()) throw DataError("ragged panel row for " + f[0]);
    dates.push_back(YearMonth::parse(f[0]));
    std::vector<double> r(assets.size());
    for (std::size_t k = 0; k < assets.size(); ++k)
      if (!try_number(f[k + 1], r[k])) throw DataError("not a number '" + f[k + 1] + "'");
    rows.push_back(std::move(r));
  }
  Matrix v(static_cast<Index>(rows.size()), static_cast<Index>(assets.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t k = 0; k < assets.size(); ++k) v(static_cast<Index>(t), static_cast<Index>(k)) = rows[t][k];
  return ReturnPanel(std::move(dates), std::move(assets), std::move(v));
}

ReturnPanel read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open panel file '" + path + "'");
  return read_panel_csv(in);
}

}  // namespace bagl
