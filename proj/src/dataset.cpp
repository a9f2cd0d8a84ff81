#include "revpref/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "revpref/error.hpp"

namespace revpref {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(const std::string& field, const std::string& where) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || field.empty())
    throw InputError(where + ": cannot parse '" + field + "' as a number");
  if (!std::isfinite(value)) throw InputError(where + ": non-finite value '" + field + "'");
  return value;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a header plus data rows, skipping blank lines. Every data row must
// have as many fields as the header.
CsvTable read_table(std::istream& in, const std::string& what) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      if (!fields.empty() && fields[0].size() >= 3 &&
          fields[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
        fields[0].erase(0, 3);
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    ++row;
    if (fields.size() != table.header.size()) {
      std::ostringstream msg;
      msg << what << " row " << row << ": expected " << table.header.size() << " fields, found "
          << fields.size();
      throw InputError(msg.str());
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw InputError(what + ": missing header row");
  return table;
}

// Locates columns prefix1..prefixL; returns their positions in order.
std::vector<int> indexed_columns(const std::vector<std::string>& header, char prefix,
                                 const std::string& what) {
  std::map<int, int> found;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const auto& name = header[c];
    if (name.size() < 2 || name[0] != prefix) continue;
    int k = 0;
    const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
    if (ec != std::errc{} || ptr != name.data() + name.size() || k < 1) continue;
    if (!found.emplace(k, c).second)
      throw InputError(what + ": duplicate column '" + name + "'");
  }
  std::vector<int> cols;
  for (int k = 1; k <= static_cast<int>(found.size()); ++k) {
    const auto it = found.find(k);
    if (it == found.end())
      throw InputError(what + ": column '" + std::string(1, prefix) + std::to_string(k) +
                       "' missing");
    cols.push_back(it->second);
  }
  return cols;
}

int column_named(const std::vector<std::string>& header, const std::string& name) {
  for (int c = 0; c < static_cast<int>(header.size()); ++c)
    if (header[c] == name) return c;
  return -1;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

DeterministicDataset::DeterministicDataset(Mat prices, Mat bundles, std::vector<std::string> labels)
    : prices_(std::move(prices)), bundles_(std::move(bundles)), labels_(std::move(labels)) {
  if (prices_.rows() < 1 || prices_.cols() < 1)
    throw InputError("dataset needs at least one observation and one good");
  if (prices_.rows() != bundles_.rows() || prices_.cols() != bundles_.cols())
    throw InputError("price and bundle dimensions differ");
  if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != prices_.rows())
    throw InputError("label count differs from observation count");
  for (int t = 0; t < size(); ++t) {
    for (int i = 0; i < goods(); ++i) {
      if (!(prices_(t, i) > 0.0))
        throw InputError("row " + std::to_string(t + 1) + ": nonpositive price p" +
                         std::to_string(i + 1));
      if (!(bundles_(t, i) >= 0.0))
        throw InputError("row " + std::to_string(t + 1) + ": negative quantity x" +
                         std::to_string(i + 1));
    }
    if (!(expenditure(t) > 0.0))
      throw InputError("row " + std::to_string(t + 1) + ": zero expenditure");
  }
}

StochasticDataset::StochasticDataset(std::vector<Period> periods) : periods_(std::move(periods)) {
  if (periods_.empty()) throw InputError("stochastic dataset has no periods");
  const auto goods = periods_.front().prices.size();
  if (goods < 1) throw InputError("stochastic dataset has no goods");
  for (const auto& period : periods_) {
    const std::string where = "period '" + period.id + "'";
    if (period.prices.size() != goods || period.choices.cols() != goods)
      throw InputError(where + ": dimension mismatch");
    if (period.choices.rows() < 1) throw InputError(where + ": no choices");
    if (!period.households.empty() &&
        static_cast<Eigen::Index>(period.households.size()) != period.choices.rows())
      throw InputError(where + ": household id count differs from choice count");
    if (!(period.prices.array() > 0.0).all()) throw InputError(where + ": nonpositive price");
    for (Eigen::Index n = 0; n < period.choices.rows(); ++n) {
      if (!(period.choices.row(n).array() >= 0.0).all())
        throw InputError(where + ": negative quantity in choice " + std::to_string(n + 1));
      if (!(period.choices.row(n).dot(period.prices) > 0.0))
        throw InputError(where + ": zero expenditure in choice " + std::to_string(n + 1));
    }
  }
}

int StochasticDataset::total_sample_size() const {
  int n = 0;
  for (const auto& p : periods_) n += p.sample_size();
  return n;
}

Mat StochasticDataset::price_matrix() const {
  Mat m(size(), goods());
  for (int t = 0; t < size(); ++t) m.row(t) = periods_[t].prices.transpose();
  return m;
}

CostMatrix::CostMatrix(Mat costs) : costs_(std::move(costs)) {
  if (costs_.rows() < 1 || costs_.rows() != costs_.cols())
    throw InputError("cost matrix must be square and nonempty");
  if (!(costs_.array() >= 0.0).all()) throw InputError("cost matrix has negative entries");
  for (int t = 0; t < size(); ++t)
    if (!(costs_(t, t) > 0.0)) throw InputError("cost matrix diagonal must be positive");
}

CostMatrix CostMatrix::from_linear(const DeterministicDataset& data) {
  return CostMatrix(data.cross_expenditure());
}

DeterministicDataset parse_deterministic(std::istream& in) {
  const auto table = read_table(in, "wide-csv");
  const auto pcols = indexed_columns(table.header, 'p', "wide-csv");
  const auto xcols = indexed_columns(table.header, 'x', "wide-csv");
  if (pcols.empty()) throw InputError("wide-csv: no price columns p1..pL");
  if (pcols.size() != xcols.size())
    throw InputError("wide-csv: dimension mismatch, " + std::to_string(pcols.size()) +
                     " price columns but " + std::to_string(xcols.size()) + " quantity columns");
  const int label_col = column_named(table.header, "label");
  const int extra = label_col >= 0 ? 1 : 0;
  if (table.header.size() != pcols.size() * 2 + extra)
    throw InputError("wide-csv: unexpected columns in header");

  const auto T = static_cast<Eigen::Index>(table.rows.size());
  const auto L = static_cast<Eigen::Index>(pcols.size());
  if (T < 1) throw InputError("wide-csv: no observations");
  Mat prices(T, L), bundles(T, L);
  std::vector<std::string> labels;
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto& row = table.rows[t];
    const std::string where = "wide-csv row " + std::to_string(t + 1);
    for (Eigen::Index i = 0; i < L; ++i) {
      prices(t, i) = parse_number(row[pcols[i]], where);
      bundles(t, i) = parse_number(row[xcols[i]], where);
    }
    if (label_col >= 0) labels.push_back(row[label_col]);
  }
  return DeterministicDataset(std::move(prices), std::move(bundles), std::move(labels));
}

DeterministicDataset load_deterministic(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_deterministic(in);
}

void write_deterministic(std::ostream& out, const DeterministicDataset& data) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  const bool labelled = !data.labels().empty();
  if (labelled) out << "label,";
  for (int i = 0; i < data.goods(); ++i) out << 'p' << i + 1 << ',';
  for (int i = 0; i < data.goods(); ++i) out << 'x' << i + 1 << (i + 1 < data.goods() ? "," : "\n");
  for (int t = 0; t < data.size(); ++t) {
    if (labelled) out << data.labels()[t] << ',';
    for (int i = 0; i < data.goods(); ++i) out << data.prices()(t, i) << ',';
    for (int i = 0; i < data.goods(); ++i)
      out << data.bundles()(t, i) << (i + 1 < data.goods() ? "," : "\n");
  }
  out.precision(old_precision);
}

PriceTable parse_prices(std::istream& in) {
  const auto prices = read_table(in, "price file");
  const int pperiod = column_named(prices.header, "period");
  if (pperiod < 0) throw InputError("price file: missing 'period' column");
  const auto pcols = indexed_columns(prices.header, 'p', "price file");
  if (pcols.empty()) throw InputError("price file: no price columns p1..pL");
  if (prices.rows.empty()) throw InputError("price file: no periods");

  PriceTable table;
  table.prices.resize(static_cast<Eigen::Index>(prices.rows.size()), static_cast<Eigen::Index>(pcols.size()));
  for (std::size_t r = 0; r < prices.rows.size(); ++r) {
    const auto& row = prices.rows[r];
    const std::string where = "price file row " + std::to_string(r + 1);
    for (std::size_t i = 0; i < pcols.size(); ++i) {
      const double v = parse_number(row[pcols[i]], where);
      if (!(v > 0.0)) throw InputError(where + ": nonpositive price");
      table.prices(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = v;
    }
    if (std::find(table.ids.begin(), table.ids.end(), row[pperiod]) != table.ids.end())
      throw InputError(where + ": duplicate period '" + row[pperiod] + "'");
    table.ids.push_back(row[pperiod]);
  }
  return table;
}

PriceTable load_prices(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_prices(in);
}

StochasticDataset parse_stochastic(std::istream& choices_in, std::istream& prices_in) {
  const auto table = parse_prices(prices_in);
  std::vector<Period> periods;
  std::map<std::string, int> index;
  for (std::size_t r = 0; r < table.ids.size(); ++r) {
    Period period;
    period.id = table.ids[r];
    period.prices = table.prices.row(static_cast<Eigen::Index>(r)).transpose();
    index.emplace(period.id, static_cast<int>(r));
    periods.push_back(std::move(period));
  }
  const auto pcols_size = static_cast<std::size_t>(table.prices.cols());

  const auto choices = read_table(choices_in, "choices file");
  const int cperiod = column_named(choices.header, "period");
  const int chouse = column_named(choices.header, "household");
  if (cperiod < 0 || chouse < 0)
    throw InputError("choices file: header must start with 'period,household'");
  const auto xcols = indexed_columns(choices.header, 'x', "choices file");
  if (xcols.size() != pcols_size)
    throw InputError("choices file: dimension mismatch, " + std::to_string(xcols.size()) +
                     " quantity columns but " + std::to_string(pcols_size) + " prices");

  const auto L = static_cast<Eigen::Index>(xcols.size());
  std::vector<std::vector<Vec>> grouped(periods.size());
  for (std::size_t r = 0; r < choices.rows.size(); ++r) {
    const auto& row = choices.rows[r];
    const std::string where = "choices file row " + std::to_string(r + 1);
    const auto it = index.find(row[cperiod]);
    if (it == index.end())
      throw InputError(where + ": period '" + row[cperiod] + "' not in price file");
    Vec x(L);
    for (Eigen::Index i = 0; i < L; ++i) x(i) = parse_number(row[xcols[i]], where);
    grouped[it->second].push_back(std::move(x));
    periods[it->second].households.push_back(row[chouse]);
  }
  for (std::size_t t = 0; t < periods.size(); ++t) {
    if (grouped[t].empty())
      throw InputError("period '" + periods[t].id + "' has no choices (empty period)");
    periods[t].choices.resize(static_cast<Eigen::Index>(grouped[t].size()), L);
    for (std::size_t n = 0; n < grouped[t].size(); ++n)
      periods[t].choices.row(static_cast<Eigen::Index>(n)) = grouped[t][n].transpose();
  }
  return StochasticDataset(std::move(periods));
}

StochasticDataset load_stochastic(const std::filesystem::path& choices,
                                  const std::filesystem::path& prices) {
  auto cin = open_input(choices);
  auto pin = open_input(prices);
  return parse_stochastic(cin, pin);
}

void write_stochastic(std::ostream& choices, std::ostream& prices, const StochasticDataset& data) {
  const int digits = std::numeric_limits<double>::max_digits10;
  const auto old_c = choices.precision(digits);
  const auto old_p = prices.precision(digits);
  const int L = data.goods();
  prices << "period";
  for (int i = 0; i < L; ++i) prices << ",p" << i + 1;
  prices << '\n';
  choices << "period,household";
  for (int i = 0; i < L; ++i) choices << ",x" << i + 1;
  choices << '\n';
  for (const auto& period : data.periods()) {
    prices << period.id;
    for (int i = 0; i < L; ++i) prices << ',' << period.prices(i);
    prices << '\n';
    for (int n = 0; n < period.sample_size(); ++n) {
      choices << period.id << ','
              << (period.households.empty() ? std::to_string(n + 1) : period.households[n]);
      for (int i = 0; i < L; ++i) choices << ',' << period.choices(n, i);
      choices << '\n';
    }
  }
  choices.precision(old_c);
  prices.precision(old_p);
}

}  // namespace revpref
