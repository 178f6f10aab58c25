#include "splinemix/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "splinemix/error.hpp"

namespace splinemix {
namespace {

using json = nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double parse_double(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DataError(context + ": cannot parse number '" + s + "'");
  }
  if (used != s.size()) throw DataError(context + ": cannot parse number '" + s + "'");
  return v;
}

int parse_component(const std::string& s, const fs::path& file) {
  const double v = parse_double(s, file.string());
  if (v < 1.0 || v != std::floor(v) || v > 1e6) {
    throw DataError(file.string() + ": invalid component label '" + s + "'");
  }
  return static_cast<int>(v);
}

double config_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' expects a number, got '" + value + "'");
}

long long config_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' expects an integer, got '" + value + "'");
}

bool config_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "' expects true/false, got '" + value + "'");
}

Eigen::MatrixXd config_matrix(const std::string& key, const std::string& value) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(value, ';')) {
    if (row.empty()) continue;
    std::vector<double> r;
    for (const auto& cell : split(row, ',')) r.push_back(config_double(key, cell));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ConfigError("config key '" + key + "' is empty");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ConfigError("config key '" + key + "' has ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>();
  return m;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + " is empty");
  header = split(trim(line), ',');
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) {
      rows.emplace_back();
      continue;
    }
    rows.push_back(split(line, ','));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " is not 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has an empty key");
    if (!kv.emplace(key, value).second) throw ConfigError("config key '" + key + "' given twice");
  }
  return kv;
}

KeyValues read_key_values(const fs::path& path) { return parse_key_values(read_text(path)); }

FitOptions fit_options_from(const KeyValues& kv) {
  FitOptions o;
  auto& f = o.fit;
  auto& h = f.hyper;
  for (const auto& [key, value] : kv) {
    if (key == "G") f.G = static_cast<int>(config_int(key, value));
    else if (key == "m") f.m = static_cast<int>(config_int(key, value));
    else if (key == "iterations") f.iterations = static_cast<int>(config_int(key, value));
    else if (key == "burn_in") f.burn_in = static_cast<int>(config_int(key, value));
    else if (key == "thin") f.thin = static_cast<int>(config_int(key, value));
    else if (key == "seed") f.seed = static_cast<std::uint64_t>(config_int(key, value));
    else if (key == "init") {
      if (value == "kmeans") f.init = InitMethod::kmeans;
      else if (value == "random") f.init = InitMethod::random;
      else throw ConfigError("init must be 'kmeans' or 'random', got '" + value + "'");
    }
    else if (key == "standardize") o.standardize = config_bool(key, value);
    else if (key == "credible_level") o.credible_level = config_double(key, value);
    else if (key == "sigma_alpha_sq") h.sigma_alpha_sq = config_double(key, value);
    else if (key == "nu_sigma") h.nu_sigma = config_double(key, value);
    else if (key == "A_sigma") h.A_sigma = config_double(key, value);
    else if (key == "nu_tau") h.nu_tau = config_double(key, value);
    else if (key == "A_tau") h.A_tau = config_double(key, value);
    else if (key == "nu_kappa") h.nu_kappa = config_double(key, value);
    else if (key == "A_kappa") h.A_kappa = config_double(key, value);
    else if (key == "sigma_delta_sq") h.sigma_delta_sq = config_double(key, value);
    else throw ConfigError("unknown fit config key '" + key + "'");
  }
  if (!(o.credible_level > 0.0 && o.credible_level < 1.0)) throw ConfigError("credible_level must lie in (0, 1)");
  f.validate();
  return o;
}

ScenarioSpec scenario_from(const KeyValues& kv) {
  ScenarioSpec s;
  const auto preset = kv.find("scenario");
  const std::string name = preset == kv.end() ? "custom" : preset->second;
  if (name == "A") s = ScenarioSpec::scenario_a();
  else if (name == "B") s = ScenarioSpec::scenario_b();
  else if (name != "custom") throw ConfigError("scenario must be A, B or custom, got '" + name + "'");
  s.name = name;
  for (const auto& [key, value] : kv) {
    if (key == "scenario") continue;
    else if (key == "G") s.G = static_cast<int>(config_int(key, value));
    else if (key == "K") s.K = static_cast<int>(config_int(key, value));
    else if (key == "N") s.N = static_cast<int>(config_int(key, value));
    else if (key == "n") s.n = static_cast<int>(config_int(key, value));
    else if (key == "m") s.m = static_cast<int>(config_int(key, value));
    else if (key == "P") s.P = static_cast<int>(config_int(key, value));
    else if (key == "replicates") s.replicates = static_cast<int>(config_int(key, value));
    else if (key == "seed") s.seed = static_cast<std::uint64_t>(config_int(key, value));
    else if (key == "noiseless") s.noiseless = config_bool(key, value);
    else if (key == "flat_splines") s.flat_splines = config_bool(key, value);
    else if (key == "alpha0") s.alpha0 = config_matrix(key, value);
    else if (key == "alpha1") s.alpha1 = config_matrix(key, value);
    else if (key == "sigma_sq") s.sigma_sq = config_matrix(key, value);
    else if (key == "tau_sq") s.tau_sq = config_matrix(key, value);
    else if (key == "delta") s.delta = config_matrix(key, value);
    else if (key == "covariate_mean") s.covariate_mean = config_matrix(key, value).row(0).transpose();
    else throw ConfigError("unknown scenario config key '" + key + "'");
  }
  s.validate();
  return s;
}

Dataset read_dataset(const fs::path& data_csv, const fs::path& covariates_csv) {
  std::vector<std::string> header;
  const auto rows = read_csv(data_csv, header);
  if (header != std::vector<std::string>{"subject", "entry", "time", "value"}) {
    throw DataError(data_csv.string() + ": header must be 'subject,entry,time,value'");
  }

  std::vector<std::string> subjects, entries;
  std::unordered_map<std::string, int> subject_index, entry_index;
  // series[(s, e)] = (time, value) pairs
  std::vector<std::vector<std::vector<std::pair<double, double>>>> series;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = data_csv.string() + " row " + std::to_string(r + 2);
    if (row.empty()) continue;
    if (row.size() != 4) throw DataError(where + ": expected 4 fields");
    const double t = parse_double(row[2], where);
    const double v = parse_double(row[3], where);
    if (!std::isfinite(t) || !std::isfinite(v)) throw DataError(where + ": non-finite value");
    auto [sit, s_new] = subject_index.emplace(row[0], static_cast<int>(subjects.size()));
    if (s_new) {
      subjects.push_back(row[0]);
      series.emplace_back(entries.size());
    }
    auto [eit, e_new] = entry_index.emplace(row[1], static_cast<int>(entries.size()));
    if (e_new) {
      entries.push_back(row[1]);
      for (auto& s : series) s.resize(entries.size());
    }
    series[static_cast<std::size_t>(sit->second)][static_cast<std::size_t>(eit->second)].emplace_back(t, v);
  }
  if (subjects.empty()) throw DataError(data_csv.string() + " has no data rows");

  std::vector<double> ref_times;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    for (std::size_t e = 0; e < entries.size(); ++e) {
      auto& obs = series[s][e];
      if (obs.empty()) {
        throw DataError("subject " + subjects[s] + " has no observations for entry " + entries[e]);
      }
      std::stable_sort(obs.begin(), obs.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<double> times(obs.size());
      for (std::size_t j = 0; j < obs.size(); ++j) times[j] = obs[j].first;
      if (s == 0 && e == 0) {
        ref_times = times;
      } else if (times != ref_times) {
        throw DataError("subject " + subjects[s] + " entry " + entries[e] +
                        ": time points differ from subject " + subjects[0] + " entry " + entries[0] +
                        " (a common grid is required)");
      }
    }
  }

  Dataset data{rescale_times(ref_times), {}, {}, subjects, entries, {}, {}, {}};
  const auto n = static_cast<Eigen::Index>(ref_times.size());
  const auto K = static_cast<Eigen::Index>(entries.size());
  data.y.reserve(subjects.size());
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    Eigen::MatrixXd yi(n, K);
    for (Eigen::Index e = 0; e < K; ++e)
      for (Eigen::Index j = 0; j < n; ++j) yi(j, e) = series[s][static_cast<std::size_t>(e)][static_cast<std::size_t>(j)].second;
    data.y.push_back(std::move(yi));
  }

  std::vector<std::string> cov_header;
  const auto cov_rows = read_csv(covariates_csv, cov_header);
  if (cov_header.empty() || cov_header.front() != "subject") {
    throw DataError(covariates_csv.string() + ": first column must be 'subject'");
  }
  const auto P = static_cast<Eigen::Index>(cov_header.size()) - 1;
  data.covariate_names.assign(cov_header.begin() + 1, cov_header.end());
  data.covariates = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(subjects.size()), P + 1,
                                              std::numeric_limits<double>::quiet_NaN());
  data.covariates.col(0).setOnes();
  std::vector<char> seen(subjects.size(), 0);
  for (std::size_t r = 0; r < cov_rows.size(); ++r) {
    const auto& row = cov_rows[r];
    const std::string where = covariates_csv.string() + " row " + std::to_string(r + 2);
    if (row.empty()) continue;
    if (static_cast<Eigen::Index>(row.size()) != P + 1) throw DataError(where + ": wrong number of fields");
    const auto it = subject_index.find(row[0]);
    if (it == subject_index.end()) throw DataError(where + ": subject " + row[0] + " has no response data");
    const auto i = static_cast<std::size_t>(it->second);
    if (seen[i]) throw DataError(where + ": duplicate covariates for subject " + row[0]);
    seen[i] = 1;
    for (Eigen::Index p = 1; p <= P; ++p) {
      const double v = parse_double(row[static_cast<std::size_t>(p)], where);
      if (!std::isfinite(v)) throw DataError(where + ": non-finite value");
      data.covariates(static_cast<Eigen::Index>(i), p) = v;
    }
  }
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (!seen[i]) throw DataError("subject " + subjects[i] + " has no covariate row");
  }
  data.covariate_means = Eigen::VectorXd::Zero(P);
  data.covariate_sds = Eigen::VectorXd::Ones(P);
  data.validate();
  return data;
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

void write_dataset(const Dataset& data, const fs::path& data_csv, const fs::path& covariates_csv) {
  std::string text = "subject,entry,time,value\n";
  for (int i = 0; i < data.N(); ++i) {
    const auto& yi = data.y[static_cast<std::size_t>(i)];
    for (int k = 0; k < data.K(); ++k) {
      for (int j = 0; j < data.n(); ++j) {
        text += data.subject_ids[static_cast<std::size_t>(i)];
        text += ',';
        text += data.entry_names[static_cast<std::size_t>(k)];
        text += ',';
        text += format_double(data.grid[j]);
        text += ',';
        text += format_double(yi(j, k));
        text += '\n';
      }
    }
  }
  write_text(data_csv, text);

  std::string cov = "subject";
  for (const auto& name : data.covariate_names) cov += "," + name;
  cov += '\n';
  for (int i = 0; i < data.N(); ++i) {
    cov += data.subject_ids[static_cast<std::size_t>(i)];
    for (int p = 1; p <= data.P(); ++p) cov += "," + format_double(data.covariates(i, p));
    cov += '\n';
  }
  write_text(covariates_csv, cov);
}

void write_summary(const SummaryReport& report, const Dataset& data, const fs::path& dir) {
  std::string traj = "component,entry,time,mean,lower,upper\n";
  for (int g = 0; g < report.G; ++g) {
    for (int k = 0; k < report.K; ++k) {
      const auto& b = report.trajectories[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)];
      for (int j = 0; j < data.n(); ++j) {
        traj += std::to_string(g + 1) + "," + data.entry_names[static_cast<std::size_t>(k)] + "," +
                format_double(data.grid[j]) + "," + format_double(b.mean(j)) + "," +
                format_double(b.lower(j)) + "," + format_double(b.upper(j)) + "\n";
      }
    }
  }
  write_text(dir / "trajectories.csv", traj);

  std::string logi = "component,coefficient,mean,lower,upper\n";
  for (int g = 0; g < report.G; ++g) {
    const auto& coefs = report.logistic[static_cast<std::size_t>(g)];
    for (std::size_t p = 0; p < coefs.size(); ++p) {
      const std::string name = p == 0 ? "intercept" : data.covariate_names[p - 1];
      logi += std::to_string(g + 1) + "," + name + "," + format_double(coefs[p].mean) + "," +
              format_double(coefs[p].lower) + "," + format_double(coefs[p].upper) + "\n";
    }
  }
  write_text(dir / "logistic.csv", logi);

  std::string alloc = "subject";
  for (int g = 0; g < report.G; ++g) alloc += ",p" + std::to_string(g + 1);
  alloc += ",component\n";
  for (Eigen::Index i = 0; i < report.allocation.rows(); ++i) {
    alloc += data.subject_ids[static_cast<std::size_t>(i)];
    Eigen::Index best = 0;
    report.allocation.row(i).maxCoeff(&best);
    for (int g = 0; g < report.G; ++g) alloc += "," + format_double(report.allocation(i, g));
    alloc += "," + std::to_string(best + 1) + "\n";
  }
  write_text(dir / "allocations.csv", alloc);
}

void write_samples(const PosteriorSamples& samples, const fs::path& path) {
  std::string text = "sweep,log_likelihood";
  for (int g = 1; g <= samples.G; ++g) {
    for (int k = 1; k <= samples.K; ++k) {
      text += ",sigma_sq_" + std::to_string(g) + "_" + std::to_string(k);
      text += ",tau_sq_" + std::to_string(g) + "_" + std::to_string(k);
      text += ",alpha0_" + std::to_string(g) + "_" + std::to_string(k);
      text += ",alpha1_" + std::to_string(g) + "_" + std::to_string(k);
    }
    if (g < samples.G) {
      text += ",kappa_sq_" + std::to_string(g);
      for (int p = 0; p <= samples.P; ++p) text += ",delta_" + std::to_string(g) + "_" + std::to_string(p);
    }
    text += ",n_" + std::to_string(g);
  }
  text += '\n';
  for (int s = 0; s < samples.size(); ++s) {
    const auto su = static_cast<std::size_t>(s);
    text += std::to_string(samples.sweep[su]) + "," + format_double(samples.log_likelihood[su]);
    std::vector<int> counts(static_cast<std::size_t>(samples.G), 0);
    for (int label : samples.z[su]) ++counts[static_cast<std::size_t>(label)];
    for (int g = 0; g < samples.G; ++g) {
      const auto& c = samples.params[su][static_cast<std::size_t>(g)];
      for (const auto& e : c.entries) {
        text += "," + format_double(e.sigma_sq) + "," + format_double(e.tau_sq) + "," +
                format_double(e.alpha(0)) + "," + format_double(e.alpha(1));
      }
      if (g < samples.G - 1) {
        text += "," + format_double(c.kappa_sq);
        for (Eigen::Index p = 0; p < c.delta.size(); ++p) text += "," + format_double(c.delta(p));
      }
      text += "," + std::to_string(counts[static_cast<std::size_t>(g)]);
    }
    text += '\n';
  }
  write_text(path, text);
}

void write_dic(const DicReport& report, const fs::path& path) {
  std::string text = "G,mean_deviance,p_v,dic,selected\n";
  for (const auto& e : report.entries) {
    text += std::to_string(e.G) + "," + format_double(e.mean_deviance) + "," + format_double(e.p_v) +
            "," + format_double(e.dic) + "," + (e.G == report.selected_G ? "1" : "0") + "\n";
  }
  write_text(path, text);
}

FitEstimate read_fit_estimate(const fs::path& dir) {
  std::vector<std::string> header;
  const auto traj_rows = read_csv(dir / "trajectories.csv", header);
  // component,entry,time,mean,...; rows ordered by component, entry, time.
  std::vector<std::vector<std::vector<double>>> values;  // [g][k][j]
  std::vector<std::string> entry_order;
  for (const auto& row : traj_rows) {
    if (row.empty()) continue;
    if (row.size() < 4) throw DataError((dir / "trajectories.csv").string() + ": malformed row");
    const auto g = static_cast<std::size_t>(parse_component(row[0], dir / "trajectories.csv") - 1);
    auto eit = std::find(entry_order.begin(), entry_order.end(), row[1]);
    if (eit == entry_order.end()) {
      entry_order.push_back(row[1]);
      eit = entry_order.end() - 1;
    }
    const auto k = static_cast<std::size_t>(eit - entry_order.begin());
    if (values.size() <= g) values.resize(g + 1);
    if (values[g].size() <= k) values[g].resize(k + 1);
    values[g][k].push_back(parse_double(row[3], "trajectories.csv"));
  }
  FitEstimate est;
  for (const auto& comp : values) {
    if (comp.empty()) throw DataError("trajectories.csv skips a component");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(comp.front().size()), static_cast<Eigen::Index>(comp.size()));
    for (std::size_t k = 0; k < comp.size(); ++k) {
      if (comp[k].size() != comp.front().size()) throw DataError("trajectories.csv has ragged entries");
      for (std::size_t j = 0; j < comp[k].size(); ++j) m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = comp[k][j];
    }
    est.trajectories.push_back(std::move(m));
  }

  const auto logi_rows = read_csv(dir / "logistic.csv", header);
  std::vector<std::vector<double>> deltas;
  for (const auto& row : logi_rows) {
    if (row.empty()) continue;
    if (row.size() < 3) throw DataError((dir / "logistic.csv").string() + ": malformed row");
    const auto g = static_cast<std::size_t>(parse_component(row[0], dir / "logistic.csv") - 1);
    if (deltas.size() <= g) deltas.resize(g + 1);
    deltas[g].push_back(parse_double(row[2], "logistic.csv"));
  }
  if (deltas.size() != est.trajectories.size()) throw DataError("logistic.csv and trajectories.csv disagree on G");
  est.deltas.resize(static_cast<Eigen::Index>(deltas.size()), static_cast<Eigen::Index>(deltas.front().size()));
  for (std::size_t g = 0; g < deltas.size(); ++g) {
    if (deltas[g].size() != deltas.front().size()) throw DataError("logistic.csv has ragged components");
    for (std::size_t p = 0; p < deltas[g].size(); ++p) est.deltas(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(p)) = deltas[g][p];
  }
  return est;
}

void write_truth(const SimulationTruth& truth, const fs::path& path) {
  const auto& s = truth.spec;
  json j;
  j["scenario"] = {{"name", s.name},         {"G", s.G},
                   {"K", s.K},               {"N", s.N},
                   {"n", s.n},               {"m", s.m},
                   {"P", s.P},               {"seed", s.seed},
                   {"replicates", s.replicates},
                   {"noiseless", s.noiseless}, {"flat_splines", s.flat_splines},
                   {"alpha0", matrix_json(s.alpha0)}, {"alpha1", matrix_json(s.alpha1)},
                   {"sigma_sq", matrix_json(s.sigma_sq)}, {"tau_sq", matrix_json(s.tau_sq)},
                   {"delta", matrix_json(s.delta)},
                   {"covariate_mean", std::vector<double>(s.covariate_mean.data(),
                                                          s.covariate_mean.data() + s.covariate_mean.size())}};
  json reps = json::array();
  for (const auto& r : truth.replicates) {
    json rep;
    rep["delta"] = matrix_json(r.delta);
    rep["z"] = r.z;
    json means = json::array();
    json betas = json::array();
    for (std::size_t g = 0; g < r.mean.size(); ++g) {
      means.push_back(matrix_json(r.mean[g].transpose()));
      json bg = json::array();
      for (const auto& b : r.beta[g]) bg.push_back(std::vector<double>(b.data(), b.data() + b.size()));
      betas.push_back(std::move(bg));
    }
    rep["mean"] = std::move(means);
    rep["beta"] = std::move(betas);
    reps.push_back(std::move(rep));
  }
  j["replicates"] = std::move(reps);
  // nlohmann prints doubles with round-trip precision.
  write_text(path, j.dump(1) + "\n");
}

SimulationTruth read_truth(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  SimulationTruth truth;
  try {
    const auto& sj = j.at("scenario");
    auto& s = truth.spec;
    s.name = sj.at("name").get<std::string>();
    s.G = sj.at("G").get<int>();
    s.K = sj.at("K").get<int>();
    s.N = sj.at("N").get<int>();
    s.n = sj.at("n").get<int>();
    s.m = sj.at("m").get<int>();
    s.P = sj.at("P").get<int>();
    s.seed = sj.at("seed").get<std::uint64_t>();
    s.replicates = sj.at("replicates").get<int>();
    s.noiseless = sj.at("noiseless").get<bool>();
    s.flat_splines = sj.at("flat_splines").get<bool>();
    s.alpha0 = matrix_from_json(sj.at("alpha0"));
    s.alpha1 = matrix_from_json(sj.at("alpha1"));
    s.sigma_sq = matrix_from_json(sj.at("sigma_sq"));
    s.tau_sq = matrix_from_json(sj.at("tau_sq"));
    s.delta = matrix_from_json(sj.at("delta"));
    const auto cm = sj.at("covariate_mean").get<std::vector<double>>();
    s.covariate_mean = Eigen::Map<const Eigen::VectorXd>(cm.data(), static_cast<Eigen::Index>(cm.size()));
    for (const auto& rj : j.at("replicates")) {
      ScenarioTruth r;
      r.delta = matrix_from_json(rj.at("delta"));
      r.z = rj.at("z").get<std::vector<int>>();
      for (const auto& mg : rj.at("mean")) r.mean.push_back(matrix_from_json(mg).transpose());
      for (const auto& bg : rj.at("beta")) {
        std::vector<Eigen::VectorXd> row;
        for (const auto& b : bg) {
          const auto v = b.get<std::vector<double>>();
          row.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
        r.beta.push_back(std::move(row));
      }
      truth.replicates.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed truth file (" + e.what() + ")");
  }
  return truth;
}

}  // namespace splinemix
