#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "mep/error.hpp"
#include "mep/gamedef/gamedef.hpp"
#include "mep/gamedef/xml_dom.hpp"

namespace mep::gamedef {

namespace {

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Reads one element against a fixed attribute vocabulary.
class Reader {
 public:
  Reader(const XmlElement& e, const std::string& doc) : e_(e), doc_(doc) {}

  SourcePath path() const {
    return doc_ + ":" + std::to_string(e_.line) + ":" + std::to_string(e_.column);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError, path() + ": <" + e_.name + ">: " + what,
                {{"document", doc_}, {"line", e_.line}, {"column", e_.column}});
  }

  std::optional<std::string> opt(const char* key) {
    allowed_.insert(key);
    if (const auto* v = e_.attribute(key)) return *v;
    return std::nullopt;
  }

  std::string req(const char* key) {
    auto v = opt(key);
    if (!v) fail(std::string("missing attribute '") + key + "'");
    return *v;
  }

  std::optional<double> opt_double(const char* key) {
    const auto v = opt(key);
    if (!v) return std::nullopt;
    return to_double(key, *v);
  }

  double req_double(const char* key) { return to_double(key, req(key)); }

  std::optional<long> opt_long(const char* key) {
    const auto v = opt(key);
    if (!v) return std::nullopt;
    long out = 0;
    const auto s = trim(*v);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      fail(std::string("attribute '") + key + "' is not an integer: '" + *v + "'");
    }
    return out;
  }

  long req_long(const char* key) {
    const auto v = opt_long(key);
    if (!v) fail(std::string("missing attribute '") + key + "'");
    return *v;
  }

  // Rejects attributes outside the vocabulary and stray text.
  void finish(bool text_allowed = false) const {
    for (const auto& [k, v] : e_.attributes) {
      if (!allowed_.contains(k)) fail("unknown attribute '" + k + "'");
    }
    if (!text_allowed && !is_blank(e_.text)) fail("unexpected text content");
  }

  void expect_name(const char* name) const {
    if (e_.name != name) fail(std::string("expected <") + name + ">");
  }

  void no_children() const {
    if (!e_.children.empty()) {
      Reader(e_.children.front(), doc_).fail("unexpected element inside <" + e_.name + ">");
    }
  }

 private:
  double to_double(const char* key, const std::string& raw) const {
    double out = 0.0;
    const auto s = trim(raw);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      fail(std::string("attribute '") + key + "' is not a number: '" + raw + "'");
    }
    return out;
  }

  const XmlElement& e_;
  const std::string& doc_;
  std::set<std::string> allowed_;
};

Coord read_coord(Reader& r) { return Coord{r.req_double("lat"), r.req_double("lon")}; }

ChoiceDef parse_choice(const XmlElement& e, const std::string& doc) {
  Reader r(e, doc);
  ChoiceDef c;
  c.path = r.path();
  c.label = r.req("label");
  if (const auto eff = r.opt("effect")) {
    const auto kind = engine::parse_effect_kind(*eff);
    if (!kind) r.fail("unknown effect '" + *eff + "'");
    c.effect = *kind;
  }
  c.quest_id = r.opt("quest").value_or("");
  c.next = r.opt("next");
  r.finish();
  r.no_children();
  return c;
}

NodeDef parse_node(const XmlElement& e, const std::string& doc) {
  Reader r(e, doc);
  NodeDef n;
  n.path = r.path();
  n.id = r.req("id");
  r.finish();
  bool have_text = false;
  for (const auto& child : e.children) {
    if (child.name == "text") {
      Reader tr(child, doc);
      if (have_text) tr.fail("duplicate <text>");
      tr.finish(true);
      tr.no_children();
      n.text = trim(child.text);
      have_text = true;
    } else if (child.name == "choice") {
      n.choices.push_back(parse_choice(child, doc));
    } else {
      Reader(child, doc).fail("unknown element inside <node>");
    }
  }
  return n;
}

DialogDef parse_dialog(const XmlElement& e, const std::string& doc) {
  Reader r(e, doc);
  DialogDef d;
  d.path = r.path();
  d.root = r.req("root");
  r.finish();
  for (const auto& child : e.children) {
    if (child.name != "node") Reader(child, doc).fail("unknown element inside <dialog>");
    d.nodes.push_back(parse_node(child, doc));
  }
  return d;
}

NpcDef parse_npc(const XmlElement& e, const std::string& doc) {
  Reader r(e, doc);
  NpcDef n;
  n.path = r.path();
  n.id = r.req("id");
  n.name = r.opt("name").value_or(n.id);
  n.at = read_coord(r);
  n.radius_m = r.opt_double("radius-m");
  r.finish();
  for (const auto& child : e.children) {
    if (child.name != "dialog") Reader(child, doc).fail("unknown element inside <npc>");
    if (n.dialog) Reader(child, doc).fail("duplicate <dialog>");
    n.dialog = parse_dialog(child, doc);
  }
  return n;
}

ItemPlacementDef parse_placement(const XmlElement& e, const std::string& doc) {
  Reader r(e, doc);
  ItemPlacementDef p;
  p.path = r.path();
  p.kind = r.req("kind");
  const auto lat = r.opt_double("lat");
  const auto lon = r.opt_double("lon");
  const auto count = r.opt_long("count");
  r.finish();
  if (lat.has_value() != lon.has_value()) r.fail("lat and lon must be given together");
  for (const auto& child : e.children) {
    if (child.name != "at") Reader(child, doc).fail("unknown element inside <item-placement>");
    Reader cr(child, doc);
    p.points.push_back(read_coord(cr));
    cr.finish();
    cr.no_children();
  }
  if (lat) {
    if (!p.points.empty()) r.fail("use either lat/lon or <at> children, not both");
    p.at = Coord{*lat, *lon};
    p.count = count.value_or(1);
  } else {
    if (p.points.empty()) r.fail("placement needs lat/lon or at least one <at>");
    if (count) r.fail("count only applies to a lat/lon placement");
    p.count = static_cast<long>(p.points.size());
  }
  return p;
}

QuestDef parse_quest(const XmlElement& e, const std::string& doc) {
  Reader r(e, doc);
  QuestDef q;
  q.path = r.path();
  q.id = r.req("id");
  q.title = r.opt("title").value_or(q.id);
  const std::string kind = r.req("kind");
  if (kind == "reach") {
    q.kind = QuestKindTag::reach;
    r.finish();
    for (const auto& child : e.children) {
      Reader cr(child, doc);
      if (child.name != "target") cr.fail("unknown element inside reach <quest>");
      if (q.target) cr.fail("duplicate <target>");
      q.target = read_coord(cr);
      q.target_radius_m = cr.req_double("radius-m");
      cr.finish();
      cr.no_children();
    }
    if (!q.target) r.fail("reach quest needs a <target>");
  } else if (kind == "collect") {
    q.kind = QuestKindTag::collect;
    q.item_kind = r.req("item-kind");
    q.required_count = r.req_long("count");
    q.completion_npc = r.req("completion-npc");
    r.finish();
    r.no_children();
  } else if (kind == "rebus") {
    q.kind = QuestKindTag::rebus;
    q.solution = r.req("solution");
    q.min_players = r.opt_long("min-players").value_or(2);
    r.finish();
    for (const auto& child : e.children) {
      Reader cr(child, doc);
      if (child.name != "fragment") cr.fail("unknown element inside rebus <quest>");
      FragmentDef f;
      f.path = cr.path();
      f.index = cr.req_long("index");
      f.image_ref = cr.req("image");
      f.text_label = cr.opt("label").value_or("");
      cr.finish();
      cr.no_children();
      q.fragments.push_back(std::move(f));
    }
  } else {
    r.fail("unknown quest kind '" + kind + "'");
  }
  return q;
}

ParameterOverrides parse_parameters(const XmlElement& e, const std::string& doc) {
  Reader r(e, doc);
  ParameterOverrides p;
  p.path = r.path();
  p.collect_radius_m = r.opt_double("collect-radius-m");
  p.npc_interaction_radius_m = r.opt_double("npc-radius-m");
  p.max_fix_age_s = r.opt_double("max-fix-age-s");
  p.history_cap = r.opt_long("history-cap");
  p.visibility_radius_m = r.opt_double("visibility-radius-m");
  r.finish();
  r.no_children();
  return p;
}

// Parses a container document whose root holds a list of one element type.
template <class Fn>
void for_each_entry(const DocumentSet& docs, const char* doc, const char* root_name,
                    const char* entry_name, Fn&& fn) {
  const auto it = docs.find(doc);
  if (it == docs.end()) return;
  const XmlElement root = parse_xml(it->second, doc);
  const std::string doc_name = doc;
  Reader rr(root, doc_name);
  rr.expect_name(root_name);
  rr.finish();
  for (const auto& child : root.children) {
    if (child.name != entry_name) {
      Reader(child, doc_name).fail(std::string("unknown element inside <") + root_name + ">");
    }
    fn(child, doc_name);
  }
}

}  // namespace

DocumentSet load_game_dir(const std::filesystem::path& dir) {
  DocumentSet docs;
  for (const char* name : {kGameDoc, kNpcsDoc, kItemsDoc, kQuestsDoc}) {
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingDocument, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    docs.emplace(name, ss.str());
  }
  return docs;
}

GameDefinition parse_game_xml(const DocumentSet& docs) {
  const auto game_it = docs.find(kGameDoc);
  if (game_it == docs.end()) {
    throw Error(ErrorCode::MissingDocument, "game definition needs game.xml",
                {{"document", kGameDoc}});
  }
  for (const auto& [name, text] : docs) {
    if (name != kGameDoc && name != kNpcsDoc && name != kItemsDoc && name != kQuestsDoc) {
      throw Error(ErrorCode::ParseError, "unexpected document: " + name,
                  {{"document", name}, {"line", 0}, {"column", 0}});
    }
  }

  GameDefinition def;
  const std::string game_doc = kGameDoc;
  const XmlElement game = parse_xml(game_it->second, game_doc);
  Reader gr(game, game_doc);
  gr.expect_name("game");
  def.game_id = gr.req("id");
  def.title = gr.opt("title").value_or(def.game_id);
  gr.finish();
  bool have_params = false;
  for (const auto& child : game.children) {
    if (child.name != "parameters") Reader(child, game_doc).fail("unknown element inside <game>");
    if (have_params) Reader(child, game_doc).fail("duplicate <parameters>");
    def.params = parse_parameters(child, game_doc);
    have_params = true;
  }

  for_each_entry(docs, kNpcsDoc, "npcs", "npc", [&](const XmlElement& e, const std::string& doc) {
    def.npcs.push_back(parse_npc(e, doc));
  });
  for_each_entry(docs, kItemsDoc, "items", "item-placement",
                 [&](const XmlElement& e, const std::string& doc) {
                   def.item_placements.push_back(parse_placement(e, doc));
                 });
  for_each_entry(docs, kQuestsDoc, "quests", "quest",
                 [&](const XmlElement& e, const std::string& doc) {
                   def.quests.push_back(parse_quest(e, doc));
                 });
  return def;
}

}  // namespace mep::gamedef
