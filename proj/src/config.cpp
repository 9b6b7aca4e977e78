#include "unidb/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace unidb {

Gamma Gamma::parse(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF") return Gamma::infinity();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse gamma value '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("trailing characters in gamma value '" + s + "'");
  return Gamma::finite(v);
}

std::string Gamma::str() const {
  if (infinite_) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value_);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config: trailing characters in '" + key + "'");
  return x;
}

long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config: trailing characters in '" + key + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config: '" + key + "' must be true or false");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& is) {
  ExperimentConfig c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "schedule.kind") {
      if (val != "gou_cosine" && val != "gou_const" && val != "ve_linear" &&
          val != "vp_const") {
        throw ConfigError("config: unknown schedule kind '" + val + "'");
      }
      c.kind = val;
    } else if (qual == "schedule.s_offset") {
      c.s_offset = parse_double(qual, val);
    } else if (qual == "schedule.floor") {
      c.floor = parse_double(qual, val);
    } else if (qual == "schedule.floor_convention") {
      if (val != "neg_exp" && val != "literal") {
        throw ConfigError("config: floor_convention must be neg_exp or literal");
      }
      c.floor_convention = val;
    } else if (qual == "schedule.lambda_sq") {
      c.lambda_sq = parse_double(qual, val);
    } else if (qual == "schedule.theta") {
      c.theta = parse_double(qual, val);
    } else if (qual == "schedule.ve_slope") {
      c.ve_slope = parse_double(qual, val);
    } else if (qual == "schedule.vp_c") {
      c.vp_c = parse_double(qual, val);
    } else if (qual == "schedule.t_cont") {
      c.t_cont = parse_double(qual, val);
    } else if (qual == "bridge.gamma") {
      c.gammas.clear();
      for (const auto& tok : split_list(val)) c.gammas.push_back(Gamma::parse(tok));
      if (c.gammas.empty()) throw ConfigError("config: bridge.gamma list is empty");
    } else if (qual == "grid.n_steps") {
      c.n_steps = static_cast<int>(parse_int(qual, val));
    } else if (qual == "run.seed") {
      c.seed = static_cast<std::uint64_t>(parse_int(qual, val));
    } else if (qual == "run.out_dir") {
      c.out_dir = val;
    } else if (qual == "dataset.name") {
      if (val != "gaussian2d" && val != "patches") {
        throw ConfigError("config: unknown dataset '" + val + "'");
      }
      c.dataset = val;
    } else if (qual == "dataset.dim") {
      c.dim = static_cast<int>(parse_int(qual, val));
    } else if (qual == "dataset.prior_mean") {
      c.prior_mean = parse_double(qual, val);
    } else if (qual == "dataset.prior_var") {
      c.prior_var = parse_double(qual, val);
    } else if (qual == "dataset.x_T") {
      c.x_T_value = parse_double(qual, val);
    } else if (qual == "train.steps") {
      c.train_steps = static_cast<int>(parse_int(qual, val));
    } else if (qual == "train.batch_size") {
      c.batch_size = static_cast<int>(parse_int(qual, val));
    } else if (qual == "train.lr") {
      c.lr = parse_double(qual, val);
    } else if (qual == "train.time_features") {
      c.time_features = static_cast<int>(parse_int(qual, val));
    } else if (qual == "train.hidden") {
      c.hidden.clear();
      for (const auto& tok : split_list(val)) {
        c.hidden.push_back(static_cast<int>(parse_int(qual, tok)));
      }
    } else if (qual == "train.weighted") {
      c.weighted = parse_bool(qual, val);
    } else if (qual == "train.huber_delta") {
      c.huber_delta = parse_double(qual, val);
    } else if (qual == "sample.n_samples") {
      c.n_samples = static_cast<int>(parse_int(qual, val));
    } else if (qual == "sweep.endpoint_dist_sq") {
      c.endpoint_dist_sq = parse_double(qual, val);
    } else if (qual == "sweep.n_instances") {
      c.n_instances = static_cast<int>(parse_int(qual, val));
    } else {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + qual +
                        "'");
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  return parse(f);
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os << "[schedule]\n"
     << "kind = " << kind << "\n"
     << "s_offset = " << fmt(s_offset) << "\n"
     << "floor = " << fmt(floor) << "\n"
     << "floor_convention = " << floor_convention << "\n"
     << "lambda_sq = " << fmt(lambda_sq) << "\n"
     << "theta = " << fmt(theta) << "\n"
     << "ve_slope = " << fmt(ve_slope) << "\n"
     << "vp_c = " << fmt(vp_c) << "\n"
     << "t_cont = " << fmt(t_cont) << "\n\n";
  os << "[bridge]\ngamma = ";
  for (std::size_t i = 0; i < gammas.size(); ++i) os << (i ? "," : "") << gammas[i].str();
  os << "\n\n[grid]\nn_steps = " << n_steps << "\n\n";
  os << "[run]\nseed = " << seed << "\nout_dir = " << out_dir << "\n\n";
  os << "[dataset]\nname = " << dataset << "\ndim = " << dim
     << "\nprior_mean = " << fmt(prior_mean) << "\nprior_var = " << fmt(prior_var)
     << "\nx_T = " << fmt(x_T_value) << "\n\n";
  os << "[train]\nsteps = " << train_steps << "\nbatch_size = " << batch_size
     << "\nlr = " << fmt(lr) << "\ntime_features = " << time_features << "\nhidden = ";
  for (std::size_t i = 0; i < hidden.size(); ++i) os << (i ? "," : "") << hidden[i];
  os << "\nweighted = " << (weighted ? "true" : "false")
     << "\nhuber_delta = " << fmt(huber_delta) << "\n\n";
  os << "[sample]\nn_samples = " << n_samples << "\n\n";
  os << "[sweep]\nendpoint_dist_sq = " << fmt(endpoint_dist_sq)
     << "\nn_instances = " << n_instances << "\n";
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const {
  const std::string s = serialize();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

BridgeSchedule ExperimentConfig::build_schedule() const {
  if (kind == "gou_cosine") {
    return make_gou_cosine(s_offset, floor, lambda_sq, t_cont,
                           floor_convention == "literal" ? FloorConvention::LiteralExp
                                                         : FloorConvention::NegExp);
  }
  if (kind == "gou_const") return make_gou_const(theta, lambda_sq, t_cont);
  if (kind == "ve_linear") {
    const double slope = ve_slope;
    return make_ve([slope](double t) { return slope * t; },
                   [slope](double) { return slope; }, t_cont);
  }
  if (kind == "vp_const") return make_vp_const(vp_c, t_cont);
  throw ConfigError("unknown schedule kind '" + kind + "'");
}

BridgeParams ExperimentConfig::build_params(Gamma gamma) const {
  BridgeParams p;
  p.schedule = build_schedule();
  p.gamma = gamma;
  const bool gou = kind == "gou_cosine" || kind == "gou_const";
  p.m = gou ? StateVec::Constant(dim, x_T_value) : StateVec::Zero(dim);
  p.m_tracks_x_T = gou;
  return p;
}

}  // namespace unidb
