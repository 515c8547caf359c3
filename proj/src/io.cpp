#include "netform/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "netform/error.hpp"
#include "netform/format.hpp"
#include "netform/rng.hpp"

namespace netform {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string where(const CsvTable& t, std::size_t row) {
  return t.path + ":" + std::to_string(t.lines[row]);
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError(path + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable parse_csv(const std::string& text, const std::string& path) {
  CsvTable t;
  t.path = path;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      std::set<std::string> seen;
      for (const auto& h : t.header)
        if (h.empty() || !seen.insert(h).second)
          throw ParseError(path + ":" + std::to_string(lineno) + ": empty or repeated column name '" + h + "'");
      continue;
    }
    if (fields.size() != t.header.size())
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(t.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.lines.push_back(lineno);
  }
  if (t.header.empty()) throw ParseError(path + ": no header line");
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path), path); }

NetworkPanel parse_panel(const CsvTable& nets, const CsvTable& covs, const CovariateSpec& spec) {
  NetworkPanel panel;
  panel.spec = spec;

  const std::size_t c_class = covs.column("classroom_id");
  const std::size_t c_agent = covs.column("agent_id");
  const bool has_school = covs.has_column("school");
  const bool has_grade = covs.has_column("grade");
  std::vector<std::size_t> attr_cols;
  std::vector<std::string> attr_names;
  for (std::size_t j = 0; j < covs.header.size(); ++j) {
    const auto& h = covs.header[j];
    if (h == "classroom_id" || h == "agent_id" || h == "school" || h == "grade") continue;
    attr_cols.push_back(j);
    attr_names.push_back(h);
  }
  for (const auto& a : spec.attributes)
    if (std::find(attr_names.begin(), attr_names.end(), a) == attr_names.end())
      throw ParseError(covs.path + ": attribute '" + a + "' is not a column");

  std::map<std::string, std::size_t> classroom_index;
  std::vector<std::map<std::string, std::size_t>> agent_index;
  std::vector<std::map<std::string, double>> label_codes(attr_cols.size());
  for (std::size_t r = 0; r < covs.rows.size(); ++r) {
    const auto& row = covs.rows[r];
    const std::string& cid = row[c_class];
    if (cid.empty()) throw ParseError(where(covs, r) + ": empty classroom_id");
    auto [it, fresh] = classroom_index.emplace(cid, panel.observations.size());
    if (fresh) {
      Observation o;
      o.id = cid;
      o.agents.columns = attr_names;
      panel.observations.push_back(std::move(o));
      agent_index.emplace_back();
    }
    Observation& o = panel.observations[it->second];
    const std::string& aid = row[c_agent];
    if (aid.empty()) throw ParseError(where(covs, r) + ": empty agent_id");
    if (!agent_index[it->second].emplace(aid, o.agents.size()).second)
      throw ParseError(where(covs, r) + ": agent '" + aid + "' repeated in classroom '" + cid + "'");
    o.agents.ids.push_back(aid);
    o.agents.school.push_back(has_school ? row[covs.column("school")] : "");
    o.agents.grade.push_back(has_grade ? row[covs.column("grade")] : "");
    std::vector<double> vals;
    for (std::size_t l = 0; l < attr_cols.size(); ++l) {
      const std::string& s = row[attr_cols[l]];
      double v = 0;
      if (!parse_number(s, v)) {
        if (!spec.is_categorical(attr_names[l]) || s.empty())
          throw ParseError(where(covs, r) + ": attribute '" + attr_names[l] + "' value '" + s +
                           "' is not a number");
        auto& codes = label_codes[l];
        v = codes.emplace(s, static_cast<double>(codes.size())).first->second;
      }
      vals.push_back(v);
    }
    o.agents.values.push_back(std::move(vals));
  }

  const std::size_t n_class = nets.column("classroom_id");
  const std::size_t n_period = nets.column("period");
  const std::size_t n_send = nets.column("sender");
  const std::size_t n_recv = nets.column("receiver");
  for (auto& o : panel.observations) {
    o.baseline = Network(o.agents.size());
    o.followup = Network(o.agents.size());
  }
  std::vector<std::array<bool, 2>> seen(panel.size(), {false, false});
  for (std::size_t r = 0; r < nets.rows.size(); ++r) {
    const auto& row = nets.rows[r];
    const auto it = classroom_index.find(row[n_class]);
    if (it == classroom_index.end())
      throw ParseError(where(nets, r) + ": classroom '" + row[n_class] + "' has no covariates");
    const std::size_t c = it->second;
    int period;
    if (row[n_period] == "T0") period = 0;
    else if (row[n_period] == "T1") period = 1;
    else throw ParseError(where(nets, r) + ": period must be T0 or T1, found '" + row[n_period] + "'");
    seen[c][static_cast<std::size_t>(period)] = true;
    if (row[n_send].empty() && row[n_recv].empty()) continue;
    const auto& agents = agent_index[c];
    const auto si = agents.find(row[n_send]);
    const auto ri = agents.find(row[n_recv]);
    if (si == agents.end() || ri == agents.end())
      throw ParseError(where(nets, r) + ": unknown agent '" +
                       (si == agents.end() ? row[n_send] : row[n_recv]) + "' in classroom '" +
                       row[n_class] + "'");
    if (si->second == ri->second)
      throw ParseError(where(nets, r) + ": self-nomination by '" + row[n_send] + "'");
    Network& g = period == 0 ? panel.observations[c].baseline : panel.observations[c].followup;
    if (g(si->second, ri->second))
      throw ParseError(where(nets, r) + ": duplicate edge " + row[n_send] + " -> " + row[n_recv]);
    g.set_unchecked(si->second, ri->second, true);
  }
  for (std::size_t c = 0; c < panel.size(); ++c)
    for (int p = 0; p < 2; ++p)
      if (!seen[c][static_cast<std::size_t>(p)])
        throw ParseError(nets.path + ": classroom '" + panel.observations[c].id + "' has no " +
                         (p == 0 ? "T0" : "T1") + " rows");

  for (auto& o : panel.observations) o.covariates = derive_covariates(o.agents, spec);
  panel.validate();
  return panel;
}

NetworkPanel load_panel(const std::string& networks_path, const std::string& covariates_path,
                        const CovariateSpec& spec) {
  return parse_panel(read_csv(networks_path), read_csv(covariates_path), spec);
}

std::string panel_networks_csv(const NetworkPanel& panel) {
  std::string out = "classroom_id,period,sender,receiver\n";
  for (const auto& o : panel.observations) {
    if (o.agents.size() != o.baseline.size())
      throw ConfigError("classroom '" + o.id + "' has no agent table to save");
    for (int p = 0; p < 2; ++p) {
      const Network& g = p == 0 ? o.baseline : o.followup;
      const std::string period = p == 0 ? "T0" : "T1";
      out += o.id + "," + period + ",,\n";
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j)
          if (i != j && g(i, j)) out += o.id + "," + period + "," + o.agents.ids[i] + "," + o.agents.ids[j] + "\n";
    }
  }
  return out;
}

std::string panel_covariates_csv(const NetworkPanel& panel) {
  if (panel.empty()) return "classroom_id,agent_id\n";
  const auto& cols = panel.observations.front().agents.columns;
  bool school = false, grade = false;
  for (const auto& o : panel.observations) {
    if (o.agents.columns != cols) throw ConfigError("classrooms have different attribute columns");
    for (const auto& s : o.agents.school) school |= !s.empty();
    for (const auto& s : o.agents.grade) grade |= !s.empty();
  }
  std::string out = "classroom_id,agent_id";
  if (school) out += ",school";
  if (grade) out += ",grade";
  for (const auto& c : cols) out += "," + c;
  out += "\n";
  for (const auto& o : panel.observations) {
    if (o.agents.size() != o.baseline.size())
      throw ConfigError("classroom '" + o.id + "' has no agent table to save");
    for (std::size_t i = 0; i < o.agents.size(); ++i) {
      out += o.id + "," + o.agents.ids[i];
      if (school) out += "," + o.agents.school[i];
      if (grade) out += "," + o.agents.grade[i];
      for (double v : o.agents.values[i]) out += "," + format_double(v);
      out += "\n";
    }
  }
  return out;
}

void save_panel(const NetworkPanel& panel, const std::string& networks_path,
                const std::string& covariates_path) {
  const std::string nets = panel_networks_csv(panel);
  const std::string covs = panel_covariates_csv(panel);
  write_file(networks_path, nets);
  write_file(covariates_path, covs);
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericError("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

void GeneratorSpec::validate() const {
  if (classrooms == 0) throw ConfigError("generator needs at least one classroom");
  if (n_min < 2 || n_max < n_min) throw ConfigError("classroom sizes need 2 <= n_min <= n_max");
  if (schools == 0 || grades == 0) throw ConfigError("schools and grades must be positive");
  if (beta.k() != attributes.size())
    throw ConfigError("true coefficients sized for k=" + std::to_string(beta.k()) + " but " +
                      std::to_string(attributes.size()) + " attributes are declared");
  beta.validate();
  if (!(initial_density >= 0 && initial_density <= 1))
    throw ConfigError("initial density must lie in [0, 1]");
  std::set<std::string> names;
  for (const auto& a : attributes) {
    if (a.name.empty() || a.name == "class_list" || !names.insert(a.name).second)
      throw ConfigError("attribute names must be unique, nonempty and not 'class_list'");
    if (a.law == AttributeLaw::Normal && !(a.b >= 0)) throw ConfigError("normal sd must be nonnegative");
    if (a.law == AttributeLaw::Uniform && !(a.b >= a.a)) throw ConfigError("uniform bounds reversed");
    if (a.law == AttributeLaw::Bernoulli && !(a.a >= 0 && a.a <= 1))
      throw ConfigError("Bernoulli probability must lie in [0, 1]");
  }
}

CovariateSpec GeneratorSpec::covariate_spec() const {
  CovariateSpec s;
  for (const auto& a : attributes) {
    s.attributes.push_back(a.name);
    if (a.categorical) s.categorical.push_back(a.name);
  }
  return s;
}

NetworkPanel generate_synthetic(const GeneratorSpec& spec, std::uint64_t seed) {
  spec.validate();
  NetworkPanel panel;
  panel.spec = spec.covariate_spec();
  for (std::size_t c = 0; c < spec.classrooms; ++c) {
    Rng rng(derive_seed(seed, {0x6e4, c}));
    Observation o;
    o.id = "c" + std::to_string(c + 1);
    const std::size_t n = spec.n_min + rng.below(spec.n_max - spec.n_min + 1);
    for (const auto& a : spec.attributes) o.agents.columns.push_back(a.name);
    o.agents.columns.push_back("class_list");
    const std::string school = "s" + std::to_string(c % spec.schools + 1);
    const std::string grade = "g" + std::to_string(c / spec.schools % spec.grades + 1);
    for (std::size_t i = 0; i < n; ++i) {
      o.agents.ids.push_back("a" + std::to_string(i + 1));
      o.agents.school.push_back(school);
      o.agents.grade.push_back(grade);
      std::vector<double> vals;
      for (const auto& a : spec.attributes) {
        switch (a.law) {
          case AttributeLaw::Normal: vals.push_back(a.a + a.b * rng.normal()); break;
          case AttributeLaw::Uniform: vals.push_back(a.a + (a.b - a.a) * rng.uniform()); break;
          case AttributeLaw::Bernoulli: vals.push_back(rng.uniform() < a.a ? 1.0 : 0.0); break;
        }
      }
      vals.push_back(static_cast<double>(i + 1));
      o.agents.values.push_back(std::move(vals));
    }
    o.covariates = derive_covariates(o.agents, panel.spec);

    const GameModel model(o.covariates, spec.beta, spec.shocks);
    Network g(n);
    Rng sim(derive_seed(seed, {0x51e, c}));
    switch (spec.initial) {
      case InitialLaw::Empty: break;
      case InitialLaw::Bernoulli:
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            if (i != j) g.set_unchecked(i, j, sim.uniform() < spec.initial_density);
        break;
      case InitialLaw::BurnIn: model.advance(g, spec.burn_in, sim); break;
    }
    o.baseline = g;
    model.advance(g, spec.tau, sim);
    o.followup = std::move(g);
    panel.observations.push_back(std::move(o));
  }
  panel.validate();
  return panel;
}

const char* version_string() { return "netform 0.1.0"; }

}  // namespace netform
