#include "anchormc/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace anchormc {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  while (end && *end == ' ') ++end;
  return end && *end == '\0';
}

json vec_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json ivec_to_json(const Eigen::VectorXi& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vec_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

Eigen::VectorXi ivec_from_json(const json& arr) {
  Eigen::VectorXi v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<int>();
  return v;
}

json params_to_json(const SubsetParams& params) {
  json out;
  if (const auto* g = std::get_if<GaussianClusterParams>(&params)) {
    out["mu"] = vec_to_json(g->mu);
    json sigma = json::array();
    for (Eigen::Index r = 0; r < g->sigma.rows(); ++r) {
      sigma.push_back(vec_to_json(g->sigma.row(r).transpose()));
    }
    out["sigma"] = std::move(sigma);
  } else if (const auto* f = std::get_if<FaSubsetParams>(&params)) {
    out["theta"] = vec_to_json(f->theta);
  } else {
    const auto& d = std::get<DfaSubsetParams>(params);
    out["c"] = ivec_to_json(d.c_col);
    out["w_plus"] = vec_to_json(d.w_plus);
    out["w_minus"] = vec_to_json(d.w_minus);
  }
  return out;
}

SubsetParams params_from_json(const json& obj) {
  if (obj.contains("mu")) {
    GaussianClusterParams g;
    g.mu = vec_from_json(obj["mu"]);
    const auto& rows = obj["sigma"];
    g.sigma.resize(rows.size(), rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      g.sigma.row(static_cast<Eigen::Index>(r)) =
          vec_from_json(rows[r]).transpose();
    }
    return g;
  }
  if (obj.contains("theta")) {
    return FaSubsetParams{vec_from_json(obj["theta"])};
  }
  DfaSubsetParams d;
  d.c_col = ivec_from_json(obj["c"]);
  d.w_plus = vec_from_json(obj["w_plus"]);
  d.w_minus = vec_from_json(obj["w_minus"]);
  return d;
}

json globals_to_json(const DrawGlobals& globals) {
  json out = json::object();
  if (const auto* fa = std::get_if<FaGlobals>(&globals)) {
    out["b"] = vec_to_json(fa->b);
    out["p0"] = fa->p0;
  } else if (const auto* dfa = std::get_if<DfaGlobals>(&globals)) {
    out["eta_minus"] = vec_to_json(dfa->eta_minus);
    out["eta_plus"] = vec_to_json(dfa->eta_plus);
    out["pi"] = json::array({dfa->pi[0], dfa->pi[1], dfa->pi[2]});
  }
  return out;
}

DrawGlobals globals_from_json(const json& obj) {
  if (obj.contains("p0")) {
    FaGlobals g;
    g.b = vec_from_json(obj["b"]);
    g.p0 = obj["p0"].get<double>();
    return g;
  }
  if (obj.contains("pi")) {
    DfaGlobals g;
    g.eta_minus = vec_from_json(obj["eta_minus"]);
    g.eta_plus = vec_from_json(obj["eta_plus"]);
    for (int c = 0; c < 3; ++c) g.pi[c] = obj["pi"][c].get<double>();
    return g;
  }
  return std::monostate{};
}

json draw_to_json(const SubsetDraw& draw, int t) {
  json line;
  line["t"] = t;
  line["K"] = draw.K();
  json subsets = json::array();
  for (const IdSet& f : draw.subsets) {
    json ids = json::array();
    for (ObsId id : f) ids.push_back(id);
    subsets.push_back(std::move(ids));
  }
  line["subsets"] = std::move(subsets);
  json params = json::array();
  for (const SubsetParams& p : draw.params) params.push_back(params_to_json(p));
  line["params"] = std::move(params);
  line["globals"] = globals_to_json(draw.globals);
  return line;
}

SubsetDraw draw_from_json(const json& line, SubsetKind kind) {
  SubsetDraw draw;
  draw.kind = kind;
  for (const json& ids : line["subsets"]) {
    IdSet f;
    f.reserve(ids.size());
    for (const json& id : ids) f.push_back(id.get<ObsId>());
    draw.subsets.push_back(std::move(f));
  }
  for (const json& p : line["params"]) {
    draw.params.push_back(params_from_json(p));
  }
  if (line.contains("globals")) {
    draw.globals = globals_from_json(line["globals"]);
  }
  return draw;
}

json allocation_to_json(const AllocationMatrix& a) {
  json out;
  out["kind"] = to_string(a.kind);
  out["n"] = a.n;
  out["K"] = a.K;
  json cols = json::array();
  for (int k = 0; k < a.K; ++k) {
    json members = json::array();
    for (int i = 0; i < a.n; ++i) {
      if (a.at(i, k)) members.push_back(i + 1);
    }
    cols.push_back(std::move(members));
  }
  out["subsets"] = std::move(cols);
  return out;
}

AllocationMatrix allocation_from_json(const json& obj) {
  const SubsetKind kind = obj["kind"].get<std::string>() == "partition"
                              ? SubsetKind::Partition
                              : SubsetKind::Feature;
  AllocationMatrix a = AllocationMatrix::zeros(kind, obj["n"].get<int>(),
                                               obj["K"].get<int>());
  const auto& cols = obj["subsets"];
  for (int k = 0; k < a.K; ++k) {
    for (const json& id : cols[k]) a.at(id.get<int>() - 1, k) = 1;
  }
  a.validate();
  return a;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

DpmData read_dpm_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (first && !fields.empty() && !is_number(fields[0])) {
      first = false;
      continue;  // header
    }
    first = false;
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields) {
      if (!is_number(f)) throw std::runtime_error("bad CSV field: " + f);
      row.push_back(std::stod(f));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("ragged CSV: " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty CSV: " + path.string());
  DpmData data;
  data.y.resize(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      data.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  data.ids.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.ids[i] = static_cast<ObsId>(i + 1);
  }
  data.validate();
  return data;
}

void write_dpm_csv(const std::filesystem::path& path, const DpmData& data) {
  std::ofstream out = open_out(path);
  out.precision(17);
  for (Eigen::Index i = 0; i < data.y.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.y.cols(); ++j) {
      if (j) out << ',';
      out << data.y(i, j);
    }
    out << '\n';
  }
}

FaData read_fa_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  struct Cell {
    int snv, sample, y, N;
  };
  std::vector<Cell> cells;
  int max_snv = 0, max_sample = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (first && !is_number(fields[0])) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 4) {
      throw std::runtime_error("fa CSV needs (snv_id, sample_id, y, N)");
    }
    Cell c{std::stoi(fields[0]), std::stoi(fields[1]), std::stoi(fields[2]),
           std::stoi(fields[3])};
    max_snv = std::max(max_snv, c.snv);
    max_sample = std::max(max_sample, c.sample);
    cells.push_back(c);
  }
  if (cells.empty()) throw std::runtime_error("empty CSV: " + path.string());
  FaData data;
  data.y = Eigen::MatrixXi::Zero(max_snv, max_sample);
  data.N = Eigen::MatrixXi::Ones(max_snv, max_sample);
  for (const Cell& c : cells) {
    data.y(c.snv - 1, c.sample - 1) = c.y;
    data.N(c.snv - 1, c.sample - 1) = c.N;
  }
  data.ids.resize(max_snv);
  for (int i = 0; i < max_snv; ++i) data.ids[i] = i + 1;
  data.validate();
  return data;
}

void write_fa_csv(const std::filesystem::path& path, const FaData& data) {
  std::ofstream out = open_out(path);
  out << "snv_id,sample_id,y,N\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.p(); ++j) {
      out << data.ids[i] << ',' << j + 1 << ',' << data.y(i, j) << ','
          << data.N(i, j) << '\n';
    }
  }
}

DfaData read_dfa_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  struct Cell {
    int patient, symptom, value;
  };
  std::vector<Cell> cells;
  int max_patient = 0, max_symptom = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (first && !is_number(fields[0])) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 3) {
      throw std::runtime_error("dfa CSV needs (patient_id, symptom_id, value)");
    }
    Cell c{std::stoi(fields[0]), std::stoi(fields[1]), std::stoi(fields[2])};
    max_patient = std::max(max_patient, c.patient);
    max_symptom = std::max(max_symptom, c.symptom);
    cells.push_back(c);
  }
  if (cells.empty()) throw std::runtime_error("empty CSV: " + path.string());
  DfaData data;
  data.y = Eigen::MatrixXi::Zero(max_patient, max_symptom);
  for (const Cell& c : cells) data.y(c.patient - 1, c.symptom - 1) = c.value;
  data.ids.resize(max_patient);
  for (int i = 0; i < max_patient; ++i) data.ids[i] = i + 1;
  data.validate();
  return data;
}

void write_dfa_csv(const std::filesystem::path& path, const DfaData& data) {
  std::ofstream out = open_out(path);
  out << "patient_id,symptom_id,value\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.p(); ++j) {
      out << data.ids[i] << ',' << j + 1 << ',' << data.y(i, j) << '\n';
    }
  }
}

void write_shard_plan_json(const std::filesystem::path& path,
                           const ShardPlan& plan, std::uint64_t master_seed,
                           const std::string& config_hash) {
  json out;
  out["n"] = plan.n;
  out["S"] = plan.S;
  out["master_seed"] = master_seed;
  out["config_hash"] = config_hash;
  json shards = json::array();
  for (const IdSet& s : plan.shards) {
    json ids = json::array();
    for (ObsId id : s) ids.push_back(id);
    shards.push_back(std::move(ids));
  }
  out["shards"] = std::move(shards);
  out["anchor_index"] = plan.S + 1;
  open_out(path) << out.dump(2) << '\n';
}

ShardPlan read_shard_plan_json(const std::filesystem::path& path) {
  json obj = json::parse(open_in(path));
  ShardPlan plan;
  plan.n = obj["n"].get<int>();
  plan.S = obj["S"].get<int>();
  for (const json& shard : obj["shards"]) {
    IdSet ids;
    ids.reserve(shard.size());
    for (const json& id : shard) ids.push_back(id.get<ObsId>());
    plan.shards.push_back(std::move(ids));
  }
  plan.validate();
  return plan;
}

void write_truth_json(const std::filesystem::path& path,
                      const TruthFile& truth) {
  json out = allocation_to_json(truth.a);
  json params = json::array();
  for (const SubsetParams& p : truth.params) params.push_back(params_to_json(p));
  out["params"] = std::move(params);
  open_out(path) << out.dump(2) << '\n';
}

TruthFile read_truth_json(const std::filesystem::path& path) {
  json obj = json::parse(open_in(path));
  TruthFile truth;
  truth.a = allocation_from_json(obj);
  truth.kind = truth.a.kind;
  if (obj.contains("params")) {
    for (const json& p : obj["params"]) {
      truth.params.push_back(params_from_json(p));
    }
  }
  return truth;
}

FixedEntrySpec read_constraints_json(const std::filesystem::path& path) {
  json obj = json::parse(open_in(path));
  FixedEntrySpec spec;
  if (obj.contains("A")) {
    for (const json& cell : obj["A"]) {
      spec.a_cells.push_back({cell["row"].get<ObsId>(),
                              cell["feature"].get<int>(),
                              cell["value"].get<int>()});
    }
  }
  if (obj.contains("C")) {
    for (const json& cell : obj["C"]) {
      spec.c_cells.push_back({cell["col"].get<int>(),
                              cell["feature"].get<int>(),
                              cell["value"].get<int>()});
    }
  }
  return spec;
}

void write_constraints_json(const std::filesystem::path& path,
                            const FixedEntrySpec& spec) {
  json out;
  json a = json::array();
  for (const auto& cell : spec.a_cells) {
    a.push_back({{"row", cell.row}, {"feature", cell.feature},
                 {"value", cell.value}});
  }
  json c = json::array();
  for (const auto& cell : spec.c_cells) {
    c.push_back({{"col", cell.col}, {"feature", cell.feature},
                 {"value", cell.value}});
  }
  out["A"] = std::move(a);
  out["C"] = std::move(c);
  open_out(path) << out.dump(2) << '\n';
}

namespace {

json sample_header(const std::string& model, const std::string& config_hash,
                   std::uint64_t master_seed, const SampleMeta* meta,
                   bool consensus) {
  json header;
  header["type"] = consensus ? "consensus_samples" : "chain_samples";
  header["model"] = model;
  header["config_hash"] = config_hash;
  header["master_seed"] = master_seed;
  if (meta) {
    header["seed"] = meta->seed;
    header["iterations"] = meta->iterations;
    header["burnin"] = meta->burnin;
    header["thin"] = meta->thin;
    json ids = json::array();
    for (ObsId id : meta->ids) ids.push_back(id);
    header["ids"] = std::move(ids);
  }
  return header;
}

}  // namespace

std::string sample_set_to_jsonl(const SampleSet& samples,
                                const std::string& config_hash,
                                std::uint64_t master_seed) {
  std::string out = sample_header(samples.meta.model, config_hash, master_seed,
                                  &samples.meta, false)
                        .dump();
  out.push_back('\n');
  int t = 0;
  for (const SubsetDraw& draw : samples.draws) {
    out += draw_to_json(draw, ++t).dump();
    out.push_back('\n');
  }
  return out;
}

std::string consensus_to_jsonl(const std::vector<ConsensusDraw>& draws,
                               const std::string& model,
                               const std::string& config_hash,
                               std::uint64_t master_seed) {
  std::string out =
      sample_header(model, config_hash, master_seed, nullptr, true).dump();
  out.push_back('\n');
  for (const ConsensusDraw& cd : draws) {
    json line = draw_to_json(cd.draw, cd.t);
    json prov = json::array();
    for (const auto& sources : cd.provenance) {
      json subset_sources = json::array();
      for (const auto& [shard, k] : sources) {
        subset_sources.push_back(json::array({shard, k}));
      }
      prov.push_back(std::move(subset_sources));
    }
    line["provenance"] = std::move(prov);
    out += line.dump();
    out.push_back('\n');
  }
  return out;
}

void write_sample_set_jsonl(const std::filesystem::path& path,
                            const SampleSet& samples,
                            const std::string& config_hash,
                            std::uint64_t master_seed) {
  open_out(path) << sample_set_to_jsonl(samples, config_hash, master_seed);
}

void write_consensus_jsonl(const std::filesystem::path& path,
                           const std::vector<ConsensusDraw>& draws,
                           const std::string& model,
                           const std::string& config_hash,
                           std::uint64_t master_seed) {
  open_out(path) << consensus_to_jsonl(draws, model, config_hash, master_seed);
}

SampleSet read_samples_jsonl(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  SampleSet samples;
  std::string line;
  SubsetKind kind = SubsetKind::Partition;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json obj = json::parse(line);
    if (!saw_header && obj.contains("type")) {
      saw_header = true;
      samples.meta.model = obj.value("model", "");
      kind = samples.meta.model == "dpm" ? SubsetKind::Partition
                                         : SubsetKind::Feature;
      samples.meta.seed = obj.value("seed", static_cast<std::uint64_t>(0));
      samples.meta.iterations = obj.value("iterations", 0);
      samples.meta.burnin = obj.value("burnin", 0);
      samples.meta.thin = obj.value("thin", 0);
      if (obj.contains("ids")) {
        for (const json& id : obj["ids"]) {
          samples.meta.ids.push_back(id.get<ObsId>());
        }
      }
      continue;
    }
    samples.draws.push_back(draw_from_json(obj, kind));
  }
  if (samples.meta.ids.empty()) {
    // Reconstruct the universe from the draws.
    IdSet all;
    for (const SubsetDraw& d : samples.draws) {
      for (const IdSet& f : d.subsets) all = id_union(all, f);
    }
    samples.meta.ids = std::move(all);
  }
  return samples;
}

}  // namespace anchormc
