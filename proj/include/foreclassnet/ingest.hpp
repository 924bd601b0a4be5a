#ifndef FORECLASSNET_INGEST_HPP
#define FORECLASSNET_INGEST_HPP

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "foreclassnet/dataset.hpp"
#include "foreclassnet/errors.hpp"

namespace fcn {

/// ECG-style rows: label followed by the full series; the last five time
/// points become the forecast horizon (the heartbeat's tail is treated as the
/// unobserved future). Labels are remapped to a dense 0-based range in sorted
/// order of the raw values. Header row required.
inline Dataset read_ecg_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw io_error(path + ": empty file (header required)");
  const std::size_t columns = detail::split_csv_line(line).size();
  if (columns < 7)
    throw io_error(path + ": need a label plus at least 6 values per row");
  const std::size_t n_values = columns - 1;
  constexpr std::size_t horizon = 5;

  struct Row {
    long raw_label;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != columns)
      throw io_error(path + ": line " + std::to_string(line_no) + ": expected " +
                     std::to_string(columns) + " fields, got " +
                     std::to_string(fields.size()));
    Row r;
    r.raw_label = detail::parse_long(fields[0], line_no);
    r.values.reserve(n_values);
    for (std::size_t i = 1; i < fields.size(); ++i)
      r.values.push_back(detail::parse_double(fields[i], line_no));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw io_error(path + ": no data rows");

  std::map<long, int> label_map;
  for (const Row& r : rows) label_map.emplace(r.raw_label, 0);
  int next = 0;
  for (auto& [raw, dense] : label_map) dense = next++;

  Dataset ds;
  ds.m = n_values - horizon;
  ds.k = horizon;
  ds.num_classes = label_map.size();
  ds.samples.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    TimeSeriesSample s;
    s.id = static_cast<std::int64_t>(i);
    s.label = label_map.at(rows[i].raw_label);
    s.observed.assign(rows[i].values.begin(),
                      rows[i].values.end() - static_cast<std::ptrdiff_t>(horizon));
    s.future.assign(rows[i].values.end() - static_cast<std::ptrdiff_t>(horizon),
                    rows[i].values.end());
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

struct StockIngestReport {
  std::size_t windows = 0;
  std::size_t skipped_insufficient_history = 0;
};

/// Stock windows around earnings releases.
///
/// prices CSV: header ticker,date,adj_close (ISO dates).
/// earnings CSV: header ticker,date[,when]; the `when` column (e.g. before or
/// after market open) is accepted but not interpreted: the post-earnings
/// price is always the first adjusted close strictly after the earnings date.
///
/// Each earnings event with at least 40 closes on or before its date and one
/// after yields a window: observed = the last 40 closes up to the event,
/// future (k = 1) = the first close after it, label 1 iff that close is at
/// least 1.05x the last pre-event close. With normalize=true, prices in a
/// window are divided by the window's first price (the label always uses raw
/// prices; the 5% rule is scale-invariant anyway).
inline Dataset read_stock_csv(const std::string& prices_path,
                              const std::string& earnings_path, bool normalize,
                              StockIngestReport* report = nullptr) {
  constexpr std::size_t window = 40;

  std::ifstream pin(prices_path);
  if (!pin) throw io_error("cannot open '" + prices_path + "'");
  std::string line;
  if (!std::getline(pin, line)) throw io_error(prices_path + ": empty file");
  {
    auto h = detail::split_csv_line(line);
    if (h.size() != 3 || h[0] != "ticker" || h[1] != "date" || h[2] != "adj_close")
      throw io_error(prices_path + ": header must be ticker,date,adj_close");
  }
  std::map<std::string, std::vector<std::pair<std::string, double>>> prices;
  std::size_t line_no = 1;
  while (std::getline(pin, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 3)
      throw io_error(prices_path + ": line " + std::to_string(line_no) +
                     ": expected 3 fields, got " + std::to_string(f.size()));
    prices[f[0]].emplace_back(f[1], detail::parse_double(f[2], line_no));
  }
  for (auto& [ticker, series] : prices)
    std::sort(series.begin(), series.end());

  std::ifstream ein(earnings_path);
  if (!ein) throw io_error("cannot open '" + earnings_path + "'");
  if (!std::getline(ein, line)) throw io_error(earnings_path + ": empty file");
  {
    auto h = detail::split_csv_line(line);
    if (h.size() < 2 || h[0] != "ticker" || h[1] != "date")
      throw io_error(earnings_path + ": header must start with ticker,date");
  }
  std::vector<std::pair<std::string, std::string>> events;
  line_no = 1;
  while (std::getline(ein, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    if (f.size() < 2)
      throw io_error(earnings_path + ": line " + std::to_string(line_no) +
                     ": expected at least 2 fields");
    events.emplace_back(f[0], f[1]);
  }

  Dataset ds;
  ds.m = window;
  ds.k = 1;
  ds.num_classes = 2;
  StockIngestReport rep;
  for (const auto& [ticker, date] : events) {
    auto it = prices.find(ticker);
    if (it == prices.end()) {
      ++rep.skipped_insufficient_history;
      continue;
    }
    const auto& series = it->second;
    // First index strictly after the earnings date.
    std::size_t post = 0;
    while (post < series.size() && series[post].first <= date) ++post;
    if (post >= series.size() || post < window) {
      ++rep.skipped_insufficient_history;
      continue;
    }
    const double prior_close = series[post - 1].second;
    const double post_close = series[post].second;
    TimeSeriesSample s;
    s.id = static_cast<std::int64_t>(ds.samples.size());
    s.label = post_close >= 1.05 * prior_close ? 1 : 0;
    s.observed.reserve(window);
    for (std::size_t i = post - window; i < post; ++i)
      s.observed.push_back(series[i].second);
    s.future.push_back(post_close);
    if (normalize) {
      const double base = s.observed.front();
      if (base == 0.0)
        throw io_error("stock window for " + ticker + " @ " + date +
                       " starts at price 0; cannot normalize");
      for (double& v : s.observed) v /= base;
      s.future[0] /= base;
    }
    ds.samples.push_back(std::move(s));
    ++rep.windows;
  }
  if (report) *report = rep;
  return ds;
}

}  // namespace fcn

#endif  // FORECLASSNET_INGEST_HPP
