#include "asht/engine.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "asht/error.hpp"

namespace asht {

std::uint64_t trial_seed(const TrialKey& key) {
  return derive_seed({key.master_seed, key.instance, key.rep});
}

std::size_t draw_true_hypothesis(const Instance& inst, const TrialKey& key) {
  RandomStream rng(derive_seed({trial_seed(key), static_cast<std::uint64_t>(StreamTag::TrueHypothesis)}));
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t h = 0; h < inst.num_hypotheses(); ++h) {
    if (inst.prior(h) <= 0.0) continue;
    acc += inst.prior(h);
    last = h;
    if (u < acc) return h;
  }
  return last;
}

TrialRecord run_trial(const Instance& inst, const Policy& policy, double delta,
                      const TrialKey& key, const std::string& instance_id,
                      const std::string& policy_id, std::size_t selection_cap) {
  const std::uint64_t base = trial_seed(key);
  TrialRecord rec;
  rec.instance_id = instance_id;
  rec.policy = policy_id;
  rec.delta = delta;
  rec.rep = key.rep;
  rec.seed = base;
  rec.true_h = draw_true_hypothesis(inst, key);

  TrialEnvironment env(
      inst, rec.true_h,
      RandomStream(derive_seed({base, static_cast<std::uint64_t>(StreamTag::Outcomes)})),
      selection_cap);
  RandomStream policy_rng(
      derive_seed({base, static_cast<std::uint64_t>(StreamTag::Policy), key.policy}));
  rec.output_h = policy.run(env, policy_rng);
  rec.cost = env.cost();
  rec.steps = env.steps();
  rec.capped = env.exhausted();
  rec.correct = rec.output_h == rec.true_h;
  return rec;
}

std::vector<TrialRecord> run_batch(const std::vector<BatchJob>& jobs, std::size_t reps,
                                   std::uint64_t master_seed, std::size_t threads,
                                   std::size_t selection_cap) {
  const std::size_t total = jobs.size() * reps;
  std::vector<TrialRecord> out(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const BatchJob& job = jobs[i / reps];
      const TrialKey key{master_seed, job.instance_index, job.policy_index, i % reps};
      try {
        out[i] = run_trial(*job.instance, *job.policy, job.delta, key, job.instance_id,
                           job.policy_id, selection_cap);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };

  threads = std::max<std::size_t>(1, std::min(threads, total));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

Metrics aggregate(std::span<const TrialRecord> records, std::span<const double> prior,
                  const AggregateOptions& options) {
  if (records.empty()) throw ValidationError("cannot aggregate an empty record set");
  if (!options.allow_mixed_instances) {
    for (const auto& r : records) {
      if (r.instance_id != records.front().instance_id) {
        throw ValidationError("records span several instances; enable mixed aggregation");
      }
    }
  }
  const std::size_t num_h = prior.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Metrics m;
  m.trials = records.size();
  m.confusion.assign(num_h, std::vector<std::size_t>(num_h, 0));

  double sum = 0.0;
  std::size_t correct = 0;
  for (const auto& r : records) {
    if (r.true_h >= num_h || r.output_h >= num_h) {
      throw ValidationError("record hypothesis index outside the prior");
    }
    sum += r.cost;
    correct += r.correct ? 1 : 0;
    m.capped += r.capped ? 1 : 0;
    ++m.confusion[r.true_h][r.output_h];
  }
  const double n = static_cast<double>(records.size());
  m.accuracy = static_cast<double>(correct) / n;
  m.mean_cost = sum / n;
  double ss = 0.0;
  for (const auto& r : records) ss += (r.cost - m.mean_cost) * (r.cost - m.mean_cost);
  m.std_cost = records.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  m.se_cost = m.std_cost / std::sqrt(n);
  if (options.reference_cost) m.normalized_cost = m.mean_cost / *options.reference_cost;

  m.sensitivity.assign(num_h, nan);
  m.specificity.assign(num_h, nan);
  m.pac_error.assign(num_h, nan);
  double weight = 0.0, weighted_error = 0.0;
  for (std::size_t h = 0; h < num_h; ++h) {
    std::size_t row = 0, predicted = 0;
    for (std::size_t g = 0; g < num_h; ++g) {
      row += m.confusion[h][g];
      predicted += m.confusion[g][h];
    }
    const std::size_t tp = m.confusion[h][h];
    const std::size_t negatives = records.size() - row;
    const std::size_t fp = predicted - tp;
    if (row > 0) {
      m.sensitivity[h] = static_cast<double>(tp) / static_cast<double>(row);
      m.pac_error[h] = 1.0 - m.sensitivity[h];
      m.max_pac_error = std::max(m.max_pac_error, m.pac_error[h]);
      weight += prior[h];
      weighted_error += prior[h] * m.pac_error[h];
    }
    if (negatives > 0) {
      m.specificity[h] = static_cast<double>(negatives - fp) / static_cast<double>(negatives);
    }
  }
  m.total_error = weight > 0.0 ? weighted_error / weight : 0.0;
  return m;
}

namespace {

nlohmann::json nan_to_null(const std::vector<double>& v) {
  nlohmann::json j = nlohmann::json::array();
  for (double x : v) {
    if (std::isnan(x)) j.push_back(nullptr);
    else j.push_back(x);
  }
  return j;
}

}  // namespace

nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["trials"] = m.trials;
  j["capped"] = m.capped;
  j["accuracy"] = m.accuracy;
  j["mean_cost"] = m.mean_cost;
  j["std_cost"] = m.std_cost;
  j["se_cost"] = m.se_cost;
  if (m.normalized_cost) j["normalized_cost"] = *m.normalized_cost;
  else j["normalized_cost"] = nullptr;
  j["confusion"] = m.confusion;
  j["sensitivity"] = nan_to_null(m.sensitivity);
  j["specificity"] = nan_to_null(m.specificity);
  j["pac_error"] = nan_to_null(m.pac_error);
  j["max_pac_error"] = m.max_pac_error;
  j["total_error"] = m.total_error;
  return j;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kTrialHeader = "instance_id,policy,delta,rep,true_h,output_h,cost,steps,correct,seed";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <class T>
T parse_number(const std::string& text, std::size_t line) {
  T v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError("trial CSV line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return v;
}

}  // namespace

void write_trial_csv(std::ostream& out, std::span<const TrialRecord> records) {
  out << kTrialHeader << '\n';
  for (const auto& r : records) {
    out << r.instance_id << ',' << r.policy << ',' << format_double(r.delta) << ',' << r.rep << ','
        << r.true_h << ',' << r.output_h << ',' << format_double(r.cost) << ',' << r.steps << ','
        << (r.correct ? 1 : 0) << ',' << r.seed << '\n';
  }
}

void write_trial_csv(const std::filesystem::path& path, std::span<const TrialRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  write_trial_csv(out, records);
}

std::vector<TrialRecord> read_trial_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trial CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrialHeader) throw ParseError("unexpected trial CSV header: " + line);
  std::vector<TrialRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 10) {
      throw ParseError("trial CSV line " + std::to_string(lineno) + ": expected 10 cells");
    }
    TrialRecord r;
    r.instance_id = c[0];
    r.policy = c[1];
    r.delta = parse_number<double>(c[2], lineno);
    r.rep = parse_number<std::size_t>(c[3], lineno);
    r.true_h = parse_number<std::size_t>(c[4], lineno);
    r.output_h = parse_number<std::size_t>(c[5], lineno);
    r.cost = parse_number<double>(c[6], lineno);
    r.steps = parse_number<std::size_t>(c[7], lineno);
    r.correct = parse_number<int>(c[8], lineno) != 0;
    r.seed = parse_number<std::uint64_t>(c[9], lineno);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TrialRecord> read_trial_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_trial_csv(in);
}

std::vector<CurvePoint> accuracy_cost_curve(std::span<const TrialRecord> records,
                                            const std::string& reference_policy) {
  std::vector<std::string> policies;
  std::map<std::pair<std::string, double>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) {
    if (std::find(policies.begin(), policies.end(), r.policy) == policies.end()) {
      policies.push_back(r.policy);
    }
    groups[{r.policy, r.delta}].push_back(&r);
  }

  std::vector<CurvePoint> points;
  for (const auto& p : policies) {
    std::vector<CurvePoint> mine;
    for (const auto& [key, recs] : groups) {
      if (key.first != p) continue;
      CurvePoint cp;
      cp.policy = p;
      cp.delta = key.second;
      cp.trials = recs.size();
      double sum = 0.0;
      std::size_t ok = 0;
      for (auto* r : recs) {
        sum += r->cost;
        ok += r->correct ? 1 : 0;
      }
      const double n = static_cast<double>(recs.size());
      cp.accuracy = static_cast<double>(ok) / n;
      cp.mean_cost = sum / n;
      double ss = 0.0;
      for (auto* r : recs) ss += (r->cost - cp.mean_cost) * (r->cost - cp.mean_cost);
      cp.se_cost = recs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
      mine.push_back(cp);
    }
    std::sort(mine.begin(), mine.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.delta > b.delta; });
    points.insert(points.end(), mine.begin(), mine.end());
  }

  double reference = 0.0;
  bool found = false;
  for (const auto& cp : points) {
    if (cp.policy == reference_policy) {
      reference = std::max(reference, cp.mean_cost);
      found = true;
    }
  }
  if (!found) throw ValidationError("reference policy '" + reference_policy + "' has no records");
  if (!(reference > 0.0)) throw ValidationError("reference policy has zero mean cost");
  for (auto& cp : points) cp.norm_cost = cp.mean_cost / reference;
  return points;
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> points) {
  out << "policy,delta,accuracy,mean_cost,norm_cost\n";
  for (const auto& p : points) {
    out << p.policy << ',' << format_double(p.delta) << ',' << format_double(p.accuracy) << ','
        << format_double(p.mean_cost) << ',' << format_double(p.norm_cost) << '\n';
  }
}

std::optional<MatchedCost> cost_at_accuracy(std::span<const CurvePoint> points,
                                            const std::string& policy, double target) {
  std::vector<CurvePoint> mine;
  for (const auto& p : points) {
    if (p.policy == policy) mine.push_back(p);
  }
  if (mine.empty()) return std::nullopt;
  std::sort(mine.begin(), mine.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.delta > b.delta; });
  if (mine.front().accuracy >= target) {
    return MatchedCost{mine.front().mean_cost, mine.front().se_cost, true};
  }
  for (std::size_t i = 0; i + 1 < mine.size(); ++i) {
    const auto& lo = mine[i];
    const auto& hi = mine[i + 1];
    if (lo.accuracy < target && hi.accuracy >= target) {
      const double w = (target - lo.accuracy) / (hi.accuracy - lo.accuracy);
      return MatchedCost{lo.mean_cost + w * (hi.mean_cost - lo.mean_cost),
                         lo.se_cost + w * (hi.se_cost - lo.se_cost), false};
    }
  }
  return std::nullopt;
}

}  // namespace asht
