#include "hones/flows.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace hones {

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Vec Rng::normal_vec(Index n) {
  Vec out(n);
  for (Index i = 0; i < n; ++i) out(i) = normal();
  return out;
}

SyntheticFlow::SyntheticFlow(Index n, double epsilon, double c_factor, std::uint64_t seed)
    : n_(n), epsilon_(epsilon), rng_(seed) {
  if (n < 1) throw InvalidProblem("n must be positive");
  if (!(epsilon > 0.0)) throw InvalidProblem("epsilon must be positive");
  if (!(c_factor >= 0.0)) throw InvalidProblem("c_factor must be nonnegative");
  y_ = c_factor * rng_.normal_vec(n);
  c_ = epsilon_ * y_;
}

Mat SyntheticFlow::initial_matrix() const { return epsilon_ * Mat::Identity(n_, n_); }

FlowStep SyntheticFlow::next(const Vec&) {
  Vec g = rng_.normal_vec(n_);
  c_ += g * g.dot(y_);
  return FlowStep{std::move(g), c_};
}

OnsFlow::OnsFlow(PriceSeries prices) : prices_(std::move(prices)) {
  if (prices_.rows() < 1 || prices_.assets() < 1) throw EmptySeries("price series is empty");
  if (!(prices_.prices.array() > 0.0).all()) throw NonPositivePrice("prices must be positive");
  c_ = Vec::Zero(prices_.assets());
}

Mat OnsFlow::initial_matrix() const { return Mat::Identity(dim(), dim()); }

FlowStep OnsFlow::next(const Vec& x_prev) {
  if (row_ + 1 >= prices_.rows()) throw EmptySeries("price series exhausted");
  if (x_prev.size() != dim()) throw DimensionMismatch("feedback x does not match asset count");
  ++row_;
  const Vec gamma = (prices_.prices.row(row_).array() / prices_.prices.row(row_ - 1).array()).matrix().transpose();
  const double wealth = x_prev.dot(gamma);
  if (!(wealth > 0.0)) throw NonPositivePrice("x^T gamma is not positive");
  last_x_ = x_prev;
  Vec g = gamma / wealth;
  c_ += 0.25 * g;
  return FlowStep{std::move(g), c_};
}

MarkowitzFlow::MarkowitzFlow(Mat log_returns, double epsilon, double lambda)
    : returns_(std::move(log_returns)), epsilon_(epsilon), lambda_(lambda) {
  if (returns_.rows() < 1 || returns_.cols() < 1) throw EmptySeries("return series is empty");
  if (!(epsilon > 0.0)) throw InvalidProblem("epsilon must be positive");
  mean_ = Vec::Zero(returns_.cols());
}

Mat MarkowitzFlow::initial_matrix() const { return epsilon_ * Mat::Identity(dim(), dim()); }

FlowStep MarkowitzFlow::next(const Vec&) {
  if (row_ >= returns_.rows()) throw EmptySeries("return series exhausted");
  const Vec w = returns_.row(row_).transpose();
  ++row_;
  const auto t = static_cast<double>(row_);
  Vec g;
  if (row_ == 1) {
    g = Vec::Zero(dim());
    mean_ = w;
  } else {
    const Vec dev = w - mean_;
    g = std::sqrt((t - 1.0) / t) * dev;
    mean_ += dev / t;
  }
  Vec c = lambda_ == 0.0 ? Vec::Zero(dim()) : Vec(lambda_ * t * mean_);
  return FlowStep{std::move(g), std::move(c)};
}

std::string_view flow_kind_name(FlowKind kind) {
  switch (kind) {
    case FlowKind::ons: return "ons";
    case FlowKind::markowitz: return "markowitz";
    case FlowKind::synthetic: return "synthetic";
  }
  return "unknown";
}

FlowKind parse_flow_kind(std::string_view name) {
  if (name == "ons") return FlowKind::ons;
  if (name == "markowitz") return FlowKind::markowitz;
  if (name == "synthetic") return FlowKind::synthetic;
  throw InvalidProblem("unknown flow kind '" + std::string(name) + "'");
}

void FlowConfig::validate() const {
  if (n < 1) throw InvalidProblem("n must be at least 1");
  if (steps < 1) throw InvalidProblem("steps must be at least 1");
  if (!(epsilon > 0.0)) throw InvalidProblem("epsilon must be positive");
  if (!(c_factor >= 0.0)) throw InvalidProblem("c_factor must be nonnegative");
  if (!std::isfinite(lambda)) throw InvalidProblem("lambda must be finite");
}

std::string flow_config_to_json(const FlowConfig& config) {
  nlohmann::json j = {
      {"kind", std::string(flow_kind_name(config.kind))},
      {"n", config.n},
      {"steps", config.steps},
      {"epsilon", config.epsilon},
      {"c_factor", config.c_factor},
      {"seed", config.seed},
      {"lambda", config.lambda},
      {"prices", config.prices},
  };
  return j.dump(2);
}

FlowConfig flow_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid flow config JSON: ") + e.what(), 0, e.byte);
  }
  if (!j.is_object()) throw ParseError("flow config must be a JSON object", 0, 0);
  FlowConfig c;
  try {
    if (j.contains("kind")) c.kind = parse_flow_kind(j.at("kind").get<std::string>());
    if (j.contains("n")) c.n = j.at("n").get<Index>();
    if (j.contains("steps")) c.steps = j.at("steps").get<Index>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("c_factor")) c.c_factor = j.at("c_factor").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("prices")) c.prices = j.at("prices").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad flow config field: ") + e.what(), 0, 0);
  }
  c.validate();
  return c;
}

std::unique_ptr<Flow> make_flow(const FlowConfig& config) {
  config.validate();
  switch (config.kind) {
    case FlowKind::synthetic:
      return std::make_unique<SyntheticFlow>(config.n, config.epsilon, config.c_factor, config.seed);
    case FlowKind::ons:
    case FlowKind::markowitz: {
      PriceSeries prices = config.prices.empty()
                               ? synthetic_prices(config.n, config.steps + 1, config.seed)
                               : load_prices(config.prices);
      if (config.kind == FlowKind::ons) return std::make_unique<OnsFlow>(std::move(prices));
      return std::make_unique<MarkowitzFlow>(log_returns(prices), config.epsilon, config.lambda);
    }
  }
  throw InvalidProblem("unknown flow kind");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  out.push_back(cell);
  for (auto& c : out) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return out;
}

enum class Cell { ok, missing, bad };

Cell parse_price(const std::string& text, double& value) {
  if (text.empty() || text == "NA" || text == "NaN" || text == "nan" || text == "null") return Cell::missing;
  const char* first = text.data();
  const char* last = first + text.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) return Cell::bad;
  if (!std::isfinite(value) || value <= 0.0) return Cell::missing;
  return Cell::ok;
}

}  // namespace

PriceSeries parse_prices(std::istream& in) {
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line)) throw EmptySeries("price file is empty");
  const auto header = split_csv(line);
  if (header.size() < 2) throw ParseError("header needs a date column and at least one ticker", row, header.size());
  PriceSeries s;
  s.tickers.assign(header.begin() + 1, header.end());
  const std::size_t n = s.tickers.size();

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != n + 1)
      throw ParseError("expected " + std::to_string(n + 1) + " cells, found " + std::to_string(cells.size()),
                       row, std::min(cells.size(), n + 1));
    if (!s.dates.empty() && !(s.dates.back() < cells[0]))
      throw ParseError("dates must be strictly increasing", row, 1);
    bool keep = true;
    std::vector<double> parsed(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Cell cell = parse_price(cells[k + 1], parsed[k]);
      if (cell == Cell::bad) throw ParseError("unparseable price '" + cells[k + 1] + "'", row, k + 2);
      if (cell == Cell::missing) keep = false;
    }
    if (!keep) {
      ++s.dropped_rows;
      continue;
    }
    s.dates.push_back(cells[0]);
    values.insert(values.end(), parsed.begin(), parsed.end());
  }
  if (s.dates.empty()) throw EmptySeries("no usable price rows");
  const auto rows = static_cast<Index>(s.dates.size());
  s.prices.resize(rows, static_cast<Index>(n));
  for (Index r = 0; r < rows; ++r)
    for (Index k = 0; k < static_cast<Index>(n); ++k)
      s.prices(r, k) = values[static_cast<std::size_t>(r) * n + static_cast<std::size_t>(k)];
  if (s.dropped_rows > 0)
    std::cerr << "warning: dropped " << s.dropped_rows << " price row(s) with missing or non-positive values\n";
  return s;
}

PriceSeries load_prices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open price file '" + path + "'", 0, 0);
  return parse_prices(in);
}

void write_prices(std::ostream& out, const PriceSeries& series) {
  out << "date";
  for (const auto& t : series.tickers) out << ',' << t;
  out << '\n';
  char buf[32];
  for (Index r = 0; r < series.rows(); ++r) {
    out << series.dates[static_cast<std::size_t>(r)];
    for (Index k = 0; k < series.assets(); ++k) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), series.prices(r, k));
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

void write_prices(const std::string& path, const PriceSeries& series) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write price file '" + path + "'");
  write_prices(out, series);
}

PriceSeries synthetic_prices(Index assets, Index rows, std::uint64_t seed) {
  if (assets < 1 || rows < 1) throw InvalidProblem("price dimensions must be positive");
  Rng rng(seed ^ 0x5DEECE66DULL);
  Vec vol(assets);
  Vec drift(assets);
  for (Index k = 0; k < assets; ++k) {
    vol(k) = 0.01 + 0.02 * rng.uniform();
    drift(k) = 0.0002 + 0.0004 * (rng.uniform() - 0.5);
  }
  PriceSeries s;
  s.prices.resize(rows, assets);
  s.prices.row(0).setOnes();
  for (Index r = 1; r < rows; ++r)
    for (Index k = 0; k < assets; ++k)
      s.prices(r, k) = s.prices(r - 1, k) * std::exp(drift(k) - 0.5 * vol(k) * vol(k) + vol(k) * rng.normal());
  for (Index k = 0; k < assets; ++k) s.tickers.push_back("A" + std::to_string(k));
  for (Index r = 0; r < rows; ++r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "d%06ld", static_cast<long>(r));
    s.dates.emplace_back(buf);
  }
  return s;
}

Mat log_returns(const PriceSeries& series) {
  if (series.rows() < 2) throw EmptySeries("need at least two price rows for returns");
  Mat out(series.rows() - 1, series.assets());
  for (Index r = 1; r < series.rows(); ++r)
    out.row(r - 1) = (series.prices.row(r).array() / series.prices.row(r - 1).array()).log().matrix();
  return out;
}

}  // namespace hones
