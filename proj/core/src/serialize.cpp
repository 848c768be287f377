#include "arise/serialize.hpp"

#include <charconv>
#include <cmath>
#include <map>

#include "arise/error.hpp"
#include "json.hpp"

namespace arise {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

ordered_json real_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double real_from(const json& v) {
  if (v.is_null()) return -std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw ParseError("expected a number or null");
  return v.get<double>();
}

PredicateKind kind_from(const std::string& name) {
  static const std::map<std::string, PredicateKind> kinds{
      {"Word", PredicateKind::Word}, {"WordSet", PredicateKind::WordSet}, {"Stem", PredicateKind::Stem},
      {"StemSet", PredicateKind::StemSet}, {"Pos", PredicateKind::Pos}, {"PosSet", PredicateKind::PosSet},
      {"Any", PredicateKind::Any}};
  const auto it = kinds.find(name);
  if (it == kinds.end()) throw ParseError("unknown predicate kind '" + name + "'");
  return it->second;
}

ordered_json tree_json(const Rule& r, std::size_t node) {
  const auto& n = r.nodes()[node];
  ordered_json out;
  out["pred"] = {{"kind", std::string(to_string(n.pred.kind()))}, {"members", n.pred.members()}};
  if (!n.deprel.empty()) out["deprel"] = n.deprel;
  ordered_json children = ordered_json::array();
  for (auto c : r.children(node)) children.push_back(tree_json(r, c));
  out["children"] = std::move(children);
  return out;
}

void tree_nodes(const json& t, int parent, std::vector<RuleNode>& out) {
  const auto& pred = t.at("pred");
  const auto kind = kind_from(pred.at("kind").get<std::string>());
  RuleNode n{NodePredicate::from_kind(kind, pred.value("members", std::vector<std::string>{})), parent,
             t.value("deprel", std::string{})};
  out.push_back(std::move(n));
  const int self = static_cast<int>(out.size()) - 1;
  for (const auto& c : t.value("children", json::array())) tree_nodes(c, self, out);
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

void check_schema(const json& doc, const char* what) {
  if (!doc.is_object()) throw ParseError(std::string(what) + ": top level must be an object");
  const int version = doc.value("schema_version", 0);
  if (version != kSchemaVersion) {
    throw ParseError(std::string(what) + ": unsupported schema_version " + std::to_string(version));
  }
}

}  // namespace

std::string rules_to_json(std::span<const Rule> rules, std::span<const std::string> labels) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["labels"] = std::vector<std::string>(labels.begin(), labels.end());
  ordered_json arr = ordered_json::array();
  for (const auto& r : rules) {
    ordered_json o;
    o["key"] = r.key();
    o["core"] = std::string(to_string(r.core()));
    o["role"] = r.role();
    o["label"] = r.label < labels.size() ? labels[r.label] : std::to_string(r.label);
    o["lpmi"] = real_or_null(r.lpmi);
    ordered_json pmi = ordered_json::array();
    for (auto v : r.pmi) pmi.push_back(real_or_null(v));
    o["pmi"] = std::move(pmi);
    if (r.is_infimum()) {
      o["infimum"] = true;
    } else {
      o["tree"] = tree_json(r, 0);
    }
    arr.push_back(std::move(o));
  }
  doc["rules"] = std::move(arr);
  return doc.dump(2) + "\n";
}

RuleSet rules_from_json(std::string_view text) {
  const json doc = parse_json(text, "rules file");
  check_schema(doc, "rules file");
  RuleSet out;
  try {
    out.labels = doc.at("labels").get<std::vector<std::string>>();
    for (const auto& o : doc.at("rules")) {
      const std::string role = o.value("role", std::string{});
      std::optional<Rule> rule;
      if (o.value("infimum", false)) {
        const auto rel = core_relation_from(o.at("core").get<std::string>());
        if (!rel) throw ParseError("unknown core relation in rules file");
        rule = Rule::infimum(*rel, role);
      } else {
        std::vector<RuleNode> nodes;
        tree_nodes(o.at("tree"), -1, nodes);
        rule = Rule::from_nodes(std::move(nodes), role);
      }
      if (o.contains("key") && o.at("key").get<std::string>() != rule->key()) {
        throw ContractError("stored key '" + o.at("key").get<std::string>() + "' does not match rebuilt rule '" +
                            rule->key() + "'");
      }
      const std::string label = o.at("label").get<std::string>();
      const auto it = std::find(out.labels.begin(), out.labels.end(), label);
      if (it == out.labels.end()) throw ParseError("rule label '" + label + "' is not in the label list");
      rule->label = static_cast<std::size_t>(it - out.labels.begin());
      rule->lpmi = real_from(o.value("lpmi", json(nullptr)));
      for (const auto& v : o.value("pmi", json::array())) rule->pmi.push_back(real_from(v));
      out.rules.push_back(std::move(*rule));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("rules file: ") + e.what());
  }
  return out;
}

std::string params_to_json(const ModelParams& params) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["labels"] = params.labels;
  doc["rule_keys"] = params.rule_keys;
  ordered_json theta = ordered_json::array();
  for (Eigen::Index j = 0; j < params.theta.theta.rows(); ++j) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < params.theta.theta.cols(); ++c) row.push_back(params.theta.theta(j, c));
    theta.push_back(std::move(row));
  }
  doc["theta"] = std::move(theta);
  if (params.classifier) {
    const auto& phi = *params.classifier;
    ordered_json cls;
    cls["hash_dim"] = phi.hash_dim;
    cls["bias"] = std::vector<double>(phi.bias.data(), phi.bias.data() + phi.bias.size());
    ordered_json weights = ordered_json::array();
    for (Eigen::Index c = 0; c < phi.weights.cols(); ++c) {
      ordered_json sparse = ordered_json::object();
      for (Eigen::Index b = 0; b < phi.weights.rows(); ++b) {
        if (phi.weights(b, c) != 0.0) sparse[std::to_string(b)] = phi.weights(b, c);
      }
      weights.push_back(std::move(sparse));
    }
    cls["weights"] = std::move(weights);
    doc["classifier"] = std::move(cls);
  }
  return doc.dump(2) + "\n";
}

ModelParams params_from_json(std::string_view text) {
  const json doc = parse_json(text, "params file");
  check_schema(doc, "params file");
  ModelParams out;
  try {
    out.labels = doc.at("labels").get<std::vector<std::string>>();
    out.rule_keys = doc.at("rule_keys").get<std::vector<std::string>>();
    const auto& theta = doc.at("theta");
    const auto m = static_cast<Eigen::Index>(theta.size());
    const auto k = static_cast<Eigen::Index>(out.labels.size());
    if (theta.size() != out.rule_keys.size()) throw ParseError("params file: theta rows do not match rule_keys");
    out.theta = LabelModelParams::zeros(static_cast<std::size_t>(m), static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& row = theta.at(static_cast<std::size_t>(j));
      if (static_cast<Eigen::Index>(row.size()) != k) throw ParseError("params file: theta row width does not match labels");
      for (Eigen::Index c = 0; c < k; ++c) out.theta.theta(j, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    if (doc.contains("classifier")) {
      const auto& cls = doc.at("classifier");
      auto phi = FeatureClassifierParams::zeros(cls.at("hash_dim").get<std::size_t>(), static_cast<std::size_t>(k));
      const auto bias = cls.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(bias.size()) != k) throw ParseError("params file: bias width does not match labels");
      for (Eigen::Index c = 0; c < k; ++c) phi.bias(c) = bias[static_cast<std::size_t>(c)];
      const auto& weights = cls.at("weights");
      if (static_cast<Eigen::Index>(weights.size()) != k) throw ParseError("params file: weights do not match labels");
      for (Eigen::Index c = 0; c < k; ++c) {
        for (const auto& [bucket, v] : weights.at(static_cast<std::size_t>(c)).items()) {
          const auto b = std::stoull(bucket);
          if (b >= phi.hash_dim) throw ParseError("params file: weight bucket out of range");
          phi.weights(static_cast<Eigen::Index>(b), c) = v.get<double>();
        }
      }
      out.classifier = std::move(phi);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("params file: ") + e.what());
  }
  return out;
}

std::string trace_to_jsonl(std::span<const SelectionStep> trace) {
  std::string out;
  for (const auto& s : trace) {
    ordered_json o;
    o["step"] = s.step;
    o["rule"] = s.rule_key;
    o["gain"] = s.gain;
    out += o.dump() + "\n";
  }
  return out;
}

std::string training_log_csv(std::span<const std::pair<std::size_t, JointLoss>> log) {
  std::string out = "epoch,ce,nll,kl,total\n";
  for (const auto& [epoch, l] : log) {
    out += std::to_string(epoch) + "," + format_real(l.ce) + "," + format_real(l.nll) + "," + format_real(l.kl) + "," +
           format_real(l.total) + "\n";
  }
  return out;
}

}  // namespace arise
