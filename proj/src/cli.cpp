#include "fairprobe/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fairprobe/distill.hpp"
#include "fairprobe/objective.hpp"
#include "fairprobe/oracle.hpp"

namespace fairprobe::cli {

namespace {

using nlohmann::json;

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::ie: return "ie";
    case Mode::ie_dt: return "ie-dt";
    case Mode::enumerate: return "enum";
  }
  return "?";
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

json json_members(const BoolArray& members) {
  json arr = json::array();
  for (Index i = 0; i < members.size(); ++i)
    if (members[i]) arr.push_back(i);
  return arr;
}

json json_config(const RunConfig& cfg) {
  json hints = json::object();
  for (const auto& [name, kind] : cfg.schema_hints)
    hints[name] = kind == dataset::AttrKind::categorical ? "categorical" : "continuous";
  return json{{"input", cfg.input},
              {"fav_column", cfg.fav_column},
              {"fav_value", cfg.fav_value},
              {"sensitive", cfg.sensitive},
              {"schema_hints", hints},
              {"k", cfg.k},
              {"alpha", cfg.alpha},
              {"beta", cfg.beta},
              {"lambda", cfg.lambda},
              {"eps_denom", cfg.eps_denom},
              {"mode", mode_name(cfg.mode)},
              {"seed", cfg.solver.seed},
              {"seeds", cfg.seeds},
              {"learning_rate", cfg.solver.learning_rate},
              {"iterations", cfg.solver.iterations},
              {"clip_norm", cfg.solver.clip_norm},
              {"penalty_rounds", cfg.solver.penalty_rounds},
              {"mu_init", cfg.solver.mu_init},
              {"mu_growth", cfg.solver.mu_growth},
              {"init_scale", cfg.solver.init_scale},
              {"k_grouping", cfg.k_grouping == solver::KGrouping::attribute
                                 ? "attribute"
                                 : "column"},
              {"min_leaf", cfg.min_leaf},
              {"time_budget_secs", cfg.time_budget_secs}};
}

json json_theta(const solver::Evidence& ev,
                const dataset::FeatureMatrix& fm,
                const std::vector<dataset::AttributeSpec>& schema) {
  json by_attr = json::object();
  for (Index j = 0; j < ev.theta_star.size(); ++j) {
    const auto& info = fm.colmap[j];
    if (info.attribute == dataset::kIntercept || ev.theta_star[j] == 0.0)
      continue;
    const auto& spec = schema[info.attribute];
    json entry{{"weight", ev.theta_star[j]}};
    if (info.value >= 0)
      entry["value"] = spec.values[info.value];
    else
      entry["value"] = nullptr;
    by_attr[spec.name].push_back(std::move(entry));
  }
  return by_attr;
}

json json_rule(const distill::Rule& rule) {
  json preds = json::array();
  for (const auto& p : rule.predicates) {
    json jp{{"attribute", p.attribute}};
    switch (p.op) {
      case distill::RelOp::eq: jp["op"] = "="; break;
      case distill::RelOp::neq: jp["op"] = "!="; break;
      case distill::RelOp::leq: jp["op"] = "<="; break;
      case distill::RelOp::gt: jp["op"] = ">"; break;
    }
    if (p.categorical)
      jp["value"] = p.value;
    else
      jp["threshold"] = p.threshold;
    preds.push_back(std::move(jp));
  }
  return json{{"predicates", std::move(preds)},
              {"member", rule.member},
              {"support", rule.support},
              {"fav_rate", rule.fav_rate}};
}

std::string rule_text(const distill::Rule& rule) {
  std::ostringstream os;
  os << "IF ";
  if (rule.predicates.empty()) os << "always";
  for (std::size_t i = 0; i < rule.predicates.size(); ++i) {
    const auto& p = rule.predicates[i];
    if (i) os << " AND ";
    os << p.attribute;
    switch (p.op) {
      case distill::RelOp::eq: os << " = " << p.value; break;
      case distill::RelOp::neq: os << " != " << p.value; break;
      case distill::RelOp::leq: os << " <= " << fmt(p.threshold); break;
      case distill::RelOp::gt: os << " > " << fmt(p.threshold); break;
    }
  }
  os << " THEN " << (rule.member ? "member" : "non-member");
  os << "  [support=" << rule.support << ", fav_rate=" << fmt(rule.fav_rate) << "]";
  return os.str();
}

std::string predicate_text(const oracle::Predicate& p,
                           const std::vector<dataset::AttributeSpec>& schema) {
  const auto& spec = schema[p.attribute];
  std::ostringstream os;
  os << spec.name;
  switch (p.form) {
    case oracle::Predicate::Form::cat_eq:
      os << " = " << spec.values[p.value];
      break;
    case oracle::Predicate::Form::cont_gt: os << " > " << fmt(p.threshold); break;
    case oracle::Predicate::Form::cont_leq: os << " <= " << fmt(p.threshold); break;
  }
  return os.str();
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

// Prefer satisfying evidence, then the larger gap; earlier seeds keep ties.
bool better(const solver::Evidence& a, const solver::Evidence& b) {
  if (a.constraint_ok != b.constraint_ok) return a.constraint_ok;
  const double da = a.dscore.value_or(-std::numeric_limits<double>::infinity());
  const double db = b.dscore.value_or(-std::numeric_limits<double>::infinity());
  return da > db;
}

}  // namespace

std::string fingerprint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string raw = buf.str();

  std::uint64_t h = 14695981039346656037ULL;
  for (char c : raw) {
    if (c == '\r') continue;  // line-ending normalization
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string emit_dot(const distill::TreeNode& root,
                     const std::vector<dataset::ColumnInfo>& colmap,
                     const std::vector<dataset::AttributeSpec>& schema) {
  std::ostringstream os;
  os << "digraph audit_tree {\n";
  os << "  node [shape=box, fontname=\"Helvetica\"];\n";
  int next_id = 0;
  std::function<int(const distill::TreeNode&)> walk =
      [&](const distill::TreeNode& t) -> int {
    const int id = next_id++;
    if (t.is_leaf) {
      const double frac =
          t.count > 0 ? static_cast<double>(t.member_count) / t.count : 0.0;
      const double fr =
          t.count > 0 ? static_cast<double>(t.fav_count) / t.count : 0.0;
      os << "  n" << id << " [label=\"" << (t.label_member ? "member" : "non-member")
         << "\\nn=" << t.count << "\\nmember_frac=" << fmt(frac)
         << "\\nfav_rate=" << fmt(fr) << "\""
         << (t.label_member ? ", style=filled, fillcolor=lightgrey" : "") << "];\n";
      return id;
    }
    const auto& info = colmap.at(t.column);
    const auto& spec = schema.at(info.attribute);
    std::string cond;
    if (info.value >= 0)
      cond = spec.name + " = " + spec.values[info.value];
    else
      cond = spec.name + " > " + fmt(t.threshold * info.stddev + info.mean);
    os << "  n" << id << " [label=\"" << dot_escape(cond) << "\"];\n";
    const int l = walk(*t.left);
    const int r = walk(*t.right);
    os << "  n" << id << " -> n" << l << " [label=\"no\"];\n";
    os << "  n" << id << " -> n" << r << " [label=\"yes\"];\n";
    return id;
  };
  walk(root);
  os << "}\n";
  return os.str();
}

RunArtifacts execute(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.k < 1) throw std::invalid_argument("k must be at least 1");
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= cfg.beta && cfg.beta <= 1.0))
    throw std::invalid_argument("need 0 <= alpha <= beta <= 1");
  if (cfg.lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
  if (cfg.seeds < 1) throw std::invalid_argument("seeds must be at least 1");

  auto data = dataset::load_csv(cfg.input, cfg.schema_hints, cfg.fav_column,
                                cfg.fav_value);
  if (!cfg.sensitive.empty()) dataset::mark_sensitive(data, cfg.sensitive);

  RunArtifacts out;
  json& rep = out.report;
  rep["meta"] = json{{"tool", "fairprobe"},
                     {"version", kVersion},
                     {"input", cfg.input},
                     {"dataset_fingerprint", fingerprint_file(cfg.input)},
                     {"n", data.n},
                     {"config", json_config(cfg)}};

  std::ostringstream text;
  text << "fairprobe " << kVersion << " audit of " << cfg.input << " (mode "
       << mode_name(cfg.mode) << ", n=" << data.n << ")\n";

  if (cfg.mode == Mode::enumerate) {
    const auto res = oracle::enum_search(data, cfg.k, cfg.alpha, cfg.beta,
                                         cfg.time_budget_secs);
    json blk{{"explored", res.explored},
             {"exhausted_budget", res.exhausted_budget}};
    if (res.dscore) {
      json preds = json::array();
      for (const auto& p : res.predicates) {
        const auto& spec = data.schema[p.attribute];
        json jp{{"attribute", spec.name}};
        switch (p.form) {
          case oracle::Predicate::Form::cat_eq:
            jp["op"] = "=";
            jp["value"] = spec.values[p.value];
            break;
          case oracle::Predicate::Form::cont_gt:
            jp["op"] = ">";
            jp["threshold"] = p.threshold;
            break;
          case oracle::Predicate::Form::cont_leq:
            jp["op"] = "<=";
            jp["threshold"] = p.threshold;
            break;
        }
        preds.push_back(std::move(jp));
      }
      blk["predicates"] = std::move(preds);
      blk["dscore"] = *res.dscore;
      blk["size_ratio"] = static_cast<double>(res.members.count()) /
                          static_cast<double>(data.n);
      blk["members"] = json_members(res.members);
      text << "best conjunction: ";
      for (std::size_t i = 0; i < res.predicates.size(); ++i)
        text << (i ? " AND " : "")
             << predicate_text(res.predicates[i], data.schema);
      text << "\ndscore=" << fmt(*res.dscore) << "\n";
      out.exit_code = 0;
    } else {
      blk["dscore"] = nullptr;
      text << "no conjunction satisfied the size bounds\n";
      out.exit_code = 2;
    }
    rep["enum"] = std::move(blk);
  } else {
    const auto fm = dataset::encode(data, /*intercept=*/true);
    objective::ObjectiveConfig ocfg;
    ocfg.lambda = cfg.lambda;
    ocfg.k = cfg.k;
    ocfg.alpha = cfg.alpha;
    ocfg.beta = cfg.beta;
    ocfg.eps_denom = cfg.eps_denom;

    solver::Evidence best;
    std::uint64_t best_seed = 0;
    bool have = false;
    for (int s = 0; s < cfg.seeds; ++s) {
      auto scfg = cfg.solver;
      scfg.seed = cfg.solver.seed + static_cast<std::uint64_t>(s);
      auto opt = solver::optimize(data.fav, fm, ocfg, scfg);
      auto theta = solver::truncate_topk(opt.theta, cfg.k, fm.colmap,
                                         cfg.k_grouping);
      auto ev = solver::derive_evidence(data.fav, fm, theta, ocfg, data.schema);
      ev.trace = std::move(opt.trace);
      if (!have || better(ev, best)) {
        best = std::move(ev);
        best_seed = scfg.seed;
        have = true;
      }
    }

    json ie{{"seed", best_seed},
            {"key_attributes", best.key_attributes},
            {"size_ratio", best.size_ratio},
            {"constraint_ok", best.constraint_ok},
            {"theta", json_theta(best, fm, data.schema)},
            {"iterations", best.trace.size()},
            {"final_objective", best.trace.empty() ? json(nullptr)
                                                   : json(best.trace.back())},
            {"members", json_members(best.members)}};
    if (fm.intercept) ie["intercept_weight"] = best.theta_star[fm.columns.cols() - 1];
    ie["dscore"] = best.dscore ? json(*best.dscore) : json(nullptr);
    rep["ie"] = std::move(ie);
    out.exit_code = best.constraint_ok ? 0 : 2;

    text << "key attributes:";
    for (const auto& a : best.key_attributes) text << " " << a;
    text << "\nsize_ratio=" << fmt(best.size_ratio) << " dscore="
         << (best.dscore ? fmt(*best.dscore) : "n/a")
         << (best.constraint_ok ? "" : "  [size bounds violated]") << "\n";

    if (cfg.mode == Mode::ie_dt) {
      const Index s = best.members.count();
      if (!best.key_attributes.empty() && s > 0 && s < data.n) {
        const Index min_leaf =
            cfg.min_leaf > 0 ? cfg.min_leaf
                             : std::max<Index>(5, data.n / 200);
        auto pt = distill::translate(data.fav, fm, best, ocfg, min_leaf,
                                     data.schema);
        json rules = json::array();
        for (const auto& r : pt.rules) rules.push_back(json_rule(r));
        rep["ie_dt"] = json{
            {"min_leaf", min_leaf},
            {"psi", pt.psi},
            {"tree_depth", distill::tree_depth(*pt.root)},
            {"leaves", distill::leaf_count(*pt.root)},
            {"constraint_ok", pt.constraint_ok},
            {"size_ratio", static_cast<double>(pt.members_prime.count()) /
                               static_cast<double>(data.n)},
            {"dscore_prime",
             pt.dscore_prime ? json(*pt.dscore_prime) : json(nullptr)},
            {"rules", std::move(rules)},
            {"members", json_members(pt.members_prime)}};
        out.dot_text = emit_dot(*pt.root, fm.colmap, data.schema);
        text << "distilled rules (psi=" << fmt(pt.psi) << ", dscore'="
             << (pt.dscore_prime ? fmt(*pt.dscore_prime) : "n/a")
             << (pt.constraint_ok ? "" : ", size bounds violated") << "):\n";
        for (const auto& r : pt.rules) text << "  " << rule_text(r) << "\n";
      } else {
        rep["ie_dt"] = json{
            {"skipped",
             "evidence group is degenerate or names no key attributes"}};
        text << "distillation skipped: degenerate evidence\n";
      }
    }
  }

  const std::chrono::duration<double, std::milli> el =
      std::chrono::steady_clock::now() - t0;
  rep["meta"]["wall_clock_ms"] = el.count();
  out.rules_text = text.str();
  return out;
}

int run(const RunConfig& cfg) {
  const auto art = execute(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  {
    std::ofstream f(fs::path(cfg.out_dir) / "report.json");
    if (!f) throw std::runtime_error("cannot write report.json under " + cfg.out_dir);
    f << art.report.dump(2) << "\n";
  }
  if (cfg.format_text && art.rules_text) {
    std::ofstream f(fs::path(cfg.out_dir) / "rules.txt");
    f << *art.rules_text;
  }
  if (cfg.format_dot && art.dot_text) {
    std::ofstream f(fs::path(cfg.out_dir) / "tree.dot");
    f << *art.dot_text;
  }
  return art.exit_code;
}

}  // namespace fairprobe::cli
