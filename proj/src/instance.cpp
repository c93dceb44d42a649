#include "asht/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "asht/error.hpp"

namespace asht {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x * ln(x / y) with 0 ln 0 = 0.
double xlogxy(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(x / y);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string pair_name(const InstanceData& data, std::size_t g, std::size_t h) {
  auto name = [&](std::size_t i) {
    return i < data.hypotheses.size() ? data.hypotheses[i] : std::to_string(i);
  };
  return "'" + name(g) + "' and '" + name(h) + "'";
}

}  // namespace

bool OutcomeFamily::valid_parameter(double theta) const {
  if (!std::isfinite(theta)) return false;
  if (kind == FamilyKind::UnitGaussian) return true;
  if (theta < 0.0 || theta > 1.0) return false;
  if (range && (theta < range->first || theta > range->second)) return false;
  return true;
}

std::string OutcomeFamily::name() const {
  return kind == FamilyKind::Bernoulli ? "bernoulli" : "unit_gaussian";
}

double Divergence::value() const { return unbounded ? kInf : nats; }

Divergence kl_divergence(const OutcomeFamily& family, double theta1, double theta2) {
  if (family.kind == FamilyKind::UnitGaussian) {
    const double diff = theta1 - theta2;
    return {0.5 * diff * diff, false};
  }
  if (theta1 == theta2) return {0.0, false};
  // Mass of theta1 on an outcome that theta2 never produces.
  if ((theta2 == 0.0 && theta1 > 0.0) || (theta2 == 1.0 && theta1 < 1.0)) {
    return {kInf, true};
  }
  const double d = xlogxy(theta1, theta2) + xlogxy(1.0 - theta1, 1.0 - theta2);
  return {std::max(d, 0.0), false};
}

double log_likelihood(const OutcomeFamily& family, double theta, double y) {
  if (family.kind == FamilyKind::UnitGaussian) return theta * y - 0.5 * theta * theta;
  return y != 0.0 ? std::log(theta) : std::log1p(-theta);
}

void check_validity(const InstanceData& data) {
  const std::size_t n = data.means.size();
  for (std::size_t g = 0; g < n; ++g) {
    for (std::size_t h = g + 1; h < n; ++h) {
      if (data.means[g] == data.means[h]) {
        throw ValidityError(g, h,
                            "hypotheses " + pair_name(data, g, h) +
                                " have identical outcome means on every action");
      }
    }
  }
}

Instance Instance::create(InstanceData data) {
  const std::size_t num_h = data.hypotheses.size();
  const std::size_t num_a = data.actions.size();
  if (num_h == 0) throw ValidationError("instance needs at least one hypothesis");
  if (num_a == 0) throw ValidationError("instance needs at least one action");
  if (data.prior.size() != num_h) throw ValidationError("prior length differs from |H|");
  if (data.costs.empty()) data.costs.assign(num_a, 1.0);
  if (data.costs.size() != num_a) throw ValidationError("costs length differs from |A|");
  if (data.means.size() != num_h) throw ValidationError("means must have |H| rows");

  double total = 0.0;
  for (double p : data.prior) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("prior entries must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("prior must sum to 1 (got " + std::to_string(total) + ")");
  }
  for (double c : data.costs) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("action costs must be positive");
  }
  if (data.family.range) {
    const auto [lo, hi] = *data.family.range;
    if (data.family.kind != FamilyKind::Bernoulli || !(lo > 0.0) || !(hi < 1.0) || lo > hi) {
      throw ValidationError("declared parameter range must lie inside (0,1)");
    }
  }
  for (std::size_t h = 0; h < num_h; ++h) {
    if (data.means[h].size() != num_a) throw ValidationError("means must have |A| columns");
    for (std::size_t a = 0; a < num_a; ++a) {
      if (!data.family.valid_parameter(data.means[h][a])) {
        throw ValidationError("mean of hypothesis '" + data.hypotheses[h] + "' on action '" +
                              data.actions[a] + "' is not valid for the " +
                              data.family.name() + " family");
      }
    }
  }
  check_validity(data);

  Instance inst;
  inst.num_h_ = num_h;
  inst.num_a_ = num_a;
  inst.means_.resize(num_h * num_a);
  for (std::size_t h = 0; h < num_h; ++h) {
    std::copy(data.means[h].begin(), data.means[h].end(), inst.means_.begin() + h * num_a);
  }
  inst.divergence_.assign(num_h * num_h * num_a, 0.0);
  for (std::size_t g = 0; g < num_h; ++g) {
    for (std::size_t h = 0; h < num_h; ++h) {
      if (g == h) continue;
      double* row = inst.divergence_.data() + (g * num_h + h) * num_a;
      for (std::size_t a = 0; a < num_a; ++a) {
        const Divergence d = kl_divergence(data.family, inst.mean(g, a), inst.mean(h, a));
        row[a] = d.value();
        inst.has_unbounded_ = inst.has_unbounded_ || d.unbounded;
      }
    }
  }
  inst.data_ = std::move(data);
  return inst;
}

bool Instance::uniform_costs() const {
  return std::all_of(data_.costs.begin(), data_.costs.end(),
                     [&](double c) { return c == data_.costs.front(); });
}

SeparationReport separation(const Instance& inst) {
  const std::size_t num_h = inst.num_hypotheses();
  const std::size_t num_a = inst.num_actions();
  SeparationReport report;
  report.s = kInf;
  report.per_action.assign(num_a, kInf);
  for (std::size_t g = 0; g < num_h; ++g) {
    for (std::size_t h = 0; h < num_h; ++h) {
      if (g == h) continue;
      const auto row = inst.divergences(g, h);
      for (std::size_t a = 0; a < num_a; ++a) {
        if (row[a] > 0.0) report.per_action[a] = std::min(report.per_action[a], row[a]);
      }
    }
  }
  for (double sa : report.per_action) report.s = std::min(report.s, sa);
  report.pair_divergences = inst.divergence_cache();
  return report;
}

Instance generate_synthetic(std::size_t num_h, std::size_t num_a, SyntheticMode mode,
                            std::uint64_t seed) {
  if (num_h < 2) throw ValidationError("synthetic instances need at least 2 hypotheses");
  if (num_a < 1) throw ValidationError("synthetic instances need at least 1 action");
  if (mode.kind == SyntheticMode::Kind::Grid && mode.grid_k < 2) {
    throw ValidationError("grid resolution must be at least 2");
  }

  std::mt19937_64 rng(seed);
  auto draw = [&]() -> double {
    if (mode.kind == SyntheticMode::Kind::Uniform01) {
      return std::uniform_real_distribution<double>(kUniformLow, kUniformHigh)(rng);
    }
    const int i = std::uniform_int_distribution<int>(1, mode.grid_k - 1)(rng);
    return static_cast<double>(i) / mode.grid_k;
  };

  InstanceData data;
  for (std::size_t h = 0; h < num_h; ++h) data.hypotheses.push_back("h" + std::to_string(h));
  for (std::size_t a = 0; a < num_a; ++a) data.actions.push_back("a" + std::to_string(a));
  data.prior.assign(num_h, 1.0 / static_cast<double>(num_h));
  data.costs.assign(num_a, 1.0);
  data.means.assign(num_h, std::vector<double>(num_a));
  for (auto& row : data.means) {
    for (double& v : row) v = draw();
  }

  // Redraw one column at a time, cycling through actions, until every pair of
  // hypotheses is separated.
  for (int attempt = 0;; ++attempt) {
    try {
      check_validity(data);
      break;
    } catch (const ValidityError&) {
      if (attempt >= kValidityRetries) {
        throw ValidationError("could not draw a valid instance after " +
                              std::to_string(kValidityRetries) + " column redraws");
      }
      const std::size_t column = static_cast<std::size_t>(attempt) % num_a;
      for (auto& row : data.means) row[column] = draw();
    }
  }
  // Uniform prior sums to 1 only up to rounding; absorb the residue.
  double total = 0.0;
  for (double p : data.prior) total += p;
  data.prior.back() += 1.0 - total;
  return Instance::create(std::move(data));
}

Instance parse_mutation_table(const std::string& text, double floor) {
  if (!(floor > 0.0) || floor >= 1.0) throw ValidationError("floor must lie in (0,1)");
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.size() < 2) {
    throw ParseError("mutation table: missing header row with hypothesis names");
  }

  InstanceData data;
  data.hypotheses.assign(header.begin() + 1, header.end());
  const std::size_t num_h = data.hypotheses.size();
  data.means.assign(num_h, {});
  std::map<std::vector<double>, std::size_t> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != num_h + 1) {
      throw ParseError("mutation table line " + std::to_string(line_no) + ": expected " +
                       std::to_string(num_h + 1) + " cells, got " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row(num_h);
    for (std::size_t h = 0; h < num_h; ++h) {
      const std::string& cell = cells[h + 1];
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (cell.empty() || used != cell.size()) {
        throw ParseError("mutation table line " + std::to_string(line_no) +
                         ": non-numeric cell '" + cell + "'");
      }
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ParseError("mutation table line " + std::to_string(line_no) +
                         ": probability outside [0,1]: " + cell);
      }
      row[h] = v == 0.0 ? floor : v;
    }
    if (!seen.emplace(row, data.actions.size()).second) continue;
    data.actions.push_back(cells[0]);
    for (std::size_t h = 0; h < num_h; ++h) data.means[h].push_back(row[h]);
  }
  if (data.actions.empty()) throw ParseError("mutation table has no action rows");

  data.prior.assign(num_h, 1.0 / static_cast<double>(num_h));
  double total = 0.0;
  for (double p : data.prior) total += p;
  data.prior.back() += 1.0 - total;
  data.costs.assign(data.actions.size(), 1.0);
  return Instance::create(std::move(data));
}

Instance load_mutation_table(const std::filesystem::path& path, double floor) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mutation table " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_mutation_table(buffer.str(), floor);
}

nlohmann::json instance_to_json(const Instance& inst) {
  const InstanceData& d = inst.data();
  nlohmann::json j;
  j["family"] = d.family.name();
  if (d.family.range) j["range"] = {d.family.range->first, d.family.range->second};
  j["hypotheses"] = d.hypotheses;
  j["prior"] = d.prior;
  j["actions"] = d.actions;
  j["costs"] = d.costs;
  j["means"] = d.means;
  return j;
}

Instance instance_from_json(const nlohmann::json& j) {
  InstanceData d;
  try {
    const std::string family = j.at("family").get<std::string>();
    if (family == "bernoulli") {
      d.family = OutcomeFamily::bernoulli();
    } else if (family == "unit_gaussian") {
      d.family = OutcomeFamily::unit_gaussian();
    } else {
      throw ParseError("unknown outcome family '" + family + "'");
    }
    if (j.contains("range")) {
      const auto r = j.at("range").get<std::vector<double>>();
      if (r.size() != 2) throw ParseError("range must have two entries");
      d.family.range = std::make_pair(r[0], r[1]);
    }
    d.hypotheses = j.at("hypotheses").get<std::vector<std::string>>();
    d.prior = j.at("prior").get<std::vector<double>>();
    d.actions = j.at("actions").get<std::vector<std::string>>();
    if (j.contains("costs")) d.costs = j.at("costs").get<std::vector<double>>();
    d.means = j.at("means").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance JSON: ") + e.what());
  }
  return Instance::create(std::move(d));
}

Instance load_instance(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_mutation_table(path);
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("instance file " + path.string() + ": " + e.what());
  }
  return instance_from_json(j);
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << instance_to_json(inst).dump(2) << '\n';
}

}  // namespace asht
