#include "arise/lattice.hpp"

#include <optional>

#include "arise/error.hpp"

namespace arise {

namespace {

void require_same_partition(const Rule& a, const Rule& b, const char* op) {
  if (!a.same_partition(b)) {
    throw ContractError(std::string(op) + ": rules belong to different partitions (" + std::string(to_string(a.core())) +
                        "/" + a.role() + " vs " + std::string(to_string(b.core())) + "/" + b.role() + ")");
  }
}

bool embed_at(const Rule& g, std::size_t gn, const Rule& s, std::size_t sn, const Lexicon& lex);

bool embed_children(const Rule& g, std::span<const std::size_t> gk, std::size_t i, const Rule& s, std::size_t sn,
                    std::vector<std::size_t>& used, const Lexicon& lex) {
  if (i == gk.size()) return true;
  for (auto sc : s.children(sn)) {
    if (std::find(used.begin(), used.end(), sc) != used.end()) continue;
    if (s.nodes()[sc].deprel != g.nodes()[gk[i]].deprel) continue;
    if (!embed_at(g, gk[i], s, sc, lex)) continue;
    used.push_back(sc);
    if (embed_children(g, gk, i + 1, s, sn, used, lex)) return true;
    used.pop_back();
  }
  return false;
}

bool embed_at(const Rule& g, std::size_t gn, const Rule& s, std::size_t sn, const Lexicon& lex) {
  if (!pred_subsumes(g.nodes()[gn].pred, s.nodes()[sn].pred, lex)) return false;
  std::vector<std::size_t> used;
  return embed_children(g, g.children(gn), 0, s, sn, used, lex);
}

enum class ExtraPosition { parent_of_head, child_of_head, child_of_dependent };

struct Shape {
  std::size_t head;
  std::size_t dependent;
  std::optional<std::size_t> extra;
  ExtraPosition position = ExtraPosition::child_of_head;
  std::string extra_relation;
};

Shape shape_of(const Rule& r) {
  Shape s;
  s.dependent = r.core_dependent();
  s.head = static_cast<std::size_t>(r.nodes()[s.dependent].parent);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i == s.head || i == s.dependent) continue;
    s.extra = i;
    const auto& head_node = r.nodes()[s.head];
    const auto& extra_node = r.nodes()[i];
    if (head_node.parent == static_cast<int>(i)) {
      s.position = ExtraPosition::parent_of_head;
      s.extra_relation = head_node.deprel;
    } else if (extra_node.parent == static_cast<int>(s.head)) {
      s.position = ExtraPosition::child_of_head;
      s.extra_relation = extra_node.deprel;
    } else {
      s.position = ExtraPosition::child_of_dependent;
      s.extra_relation = extra_node.deprel;
    }
  }
  return s;
}

}  // namespace

bool subsumes(const Rule& general, const Rule& specific, const Lexicon& lexicon) {
  require_same_partition(general, specific, "subsumes");
  if (general.is_infimum()) return specific.is_infimum();
  if (specific.is_infimum() || general.is_supremum()) return true;
  if (general.size() > specific.size()) return false;
  for (std::size_t sn = 0; sn < specific.size(); ++sn) {
    if (embed_at(general, 0, specific, sn, lexicon)) return true;
  }
  return false;
}

Rule lgg(const Rule& a, const Rule& b, const Lexicon& lexicon, std::size_t cap) {
  require_same_partition(a, b, "lgg");
  auto fresh = [](Rule r) {
    r.label = 0;
    r.lpmi = -std::numeric_limits<double>::infinity();
    r.pmi.clear();
    return r;
  };
  if (a.is_infimum()) return fresh(b);
  if (b.is_infimum()) return fresh(a);
  if (a.is_supremum() || b.is_supremum()) return Rule::supremum(a.core(), a.role());

  const Shape sa = shape_of(a);
  const Shape sb = shape_of(b);
  const auto& an = a.nodes();
  const auto& bn = b.nodes();
  const NodePredicate head = lgg_nodes(an[sa.head].pred, bn[sb.head].pred, lexicon, cap);
  const NodePredicate dep = lgg_nodes(an[sa.dependent].pred, bn[sb.dependent].pred, lexicon, cap);
  const std::string core(to_string(a.core()));

  const bool aligned = sa.extra && sb.extra && sa.position == sb.position && sa.extra_relation == sb.extra_relation;
  std::vector<RuleNode> nodes;
  if (!aligned) {
    nodes = {{head, -1, ""}, {dep, 0, core}};
  } else {
    const NodePredicate extra = lgg_nodes(an[*sa.extra].pred, bn[*sb.extra].pred, lexicon, cap);
    switch (sa.position) {
      case ExtraPosition::parent_of_head:
        nodes = {{extra, -1, ""}, {head, 0, sa.extra_relation}, {dep, 1, core}};
        break;
      case ExtraPosition::child_of_head:
        nodes = {{head, -1, ""}, {dep, 0, core}, {extra, 0, sa.extra_relation}};
        break;
      case ExtraPosition::child_of_dependent:
        nodes = {{head, -1, ""}, {dep, 0, core}, {extra, 1, sa.extra_relation}};
        break;
    }
  }
  return Rule::from_nodes(std::move(nodes), a.role());
}

Lattice::Lattice(CoreRelation relation, std::string role, std::vector<Rule> elements, Lexicon lexicon,
                 std::size_t cap)
    : relation_(relation),
      role_(std::move(role)),
      elements_(std::move(elements)),
      supremum_(Rule::supremum(relation, role_)),
      infimum_(Rule::infimum(relation, role_)),
      lexicon_(std::move(lexicon)),
      cap_(cap) {
  sort_and_dedup(elements_);
  for (const auto& e : elements_) {
    if (e.core() != relation_ || e.role() != role_) throw ContractError("lattice element outside its partition");
  }
}

const Rule& Lattice::at(std::size_t i) const {
  if (i < elements_.size()) return elements_[i];
  if (i == elements_.size()) return supremum_;
  if (i == elements_.size() + 1) return infimum_;
  throw ContractError("lattice index out of range");
}

bool Lattice::leq(std::size_t specific, std::size_t general) const {
  return subsumes(at(general), at(specific), lexicon_);
}

Lattice build_lattice(CoreRelation relation, std::span<const Feature> partition, Lexicon lexicon, std::size_t cap,
                      std::string role) {
  std::vector<Rule> rules;
  rules.reserve(partition.size());
  for (const auto& f : partition) {
    if (f.core != relation) throw ContractError("feature '" + f.key() + "' is not in the " + std::string(to_string(relation)) + " partition");
    rules.push_back(f.as_rule());
  }
  return Lattice(relation, std::move(role), std::move(rules), std::move(lexicon), cap);
}

}  // namespace arise
