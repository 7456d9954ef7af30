#include "tmca/json_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "tmca/error.hpp"
#include "tmca/fixtures.hpp"

namespace tmca::json_io {

  namespace {

    [[noreturn]] void schema(std::string const& field, std::string const& what) {
      throw Error(ErrorCode::schema, "field '" + field + "': " + what);
    }

    Json const& field(Json const& j, char const* key, std::string const& context) {
      std::string const path = context.empty() ? key : context + "." + key;
      if (!j.is_object()) {
        schema(context.empty() ? "<root>" : context, "expected an object");
      }
      auto it = j.find(key);
      if (it == j.end()) {
        schema(path, "missing");
      }
      return *it;
    }

    std::string as_string(Json const& j, std::string const& path) {
      if (!j.is_string()) {
        schema(path, "expected a string");
      }
      return j.get<std::string>();
    }

    std::size_t as_size(Json const& j, std::string const& path) {
      if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
        schema(path, "expected a non-negative integer");
      }
      return j.get<std::size_t>();
    }

    double as_double(Json const& j, std::string const& path) {
      if (!j.is_number()) {
        schema(path, "expected a number");
      }
      return j.get<double>();
    }

    std::vector<std::string> string_list(Json const& j, std::string const& path) {
      if (!j.is_array()) {
        schema(path, "expected an array");
      }
      std::vector<std::string> out;
      for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_string(j[i], path + "[" + std::to_string(i) + "]"));
      }
      return out;
    }

    Alphabet alphabet_from(Json const& j, std::string const& context) {
      auto const path = context.empty() ? std::string("symbols") : context + ".symbols";
      auto       names = string_list(field(j, "symbols", context), path);
      if (names.empty()) {
        schema(path, "empty alphabet");
      }
      return Alphabet(std::move(names));
    }

    Json symbol_map(Alphabet const& from, Alphabet const& to, std::vector<Symbol> const& map) {
      Json out = Json::object();
      for (Symbol a = 0; a < map.size(); ++a) {
        if (map[a] != no_symbol) {
          out[from.name(a)] = to.name(map[a]);
        }
      }
      return out;
    }

    Json optional_word(Alphabet const& alphabet, std::optional<Word> const& w) {
      return w ? Json(alphabet.format(*w)) : Json(nullptr);
    }

    Json property(Property const& p, Alphabet const& alphabet) {
      Json out;
      out["holds"]   = p.holds;
      out["witness"] = p.holds ? Json(nullptr) : to_json(alphabet, p.witness);
      return out;
    }

    Json edge(Alphabet const& alphabet, Edge e) {
      return Json::array({alphabet.name(e.first), alphabet.name(e.second)});
    }

    std::vector<std::pair<Word, Symbol>> rule_entries(Json const&        rule,
                                                      MarkovShift const& source,
                                                      MarkovShift const& target,
                                                      std::size_t        window,
                                                      std::string const& path) {
      if (!rule.is_object()) {
        schema(path, "expected an object of window -> symbol");
      }
      std::vector<std::pair<Word, Symbol>> out;
      for (auto const& [key, value] : rule.items()) {
        auto const entry = path + "." + key;
        Word       w;
        try {
          w = source.alphabet().parse(key);
        } catch (Error const& e) {
          schema(entry, e.what());
        }
        if (w.size() != window) {
          schema(entry, "window length " + std::to_string(w.size()) + ", expected "
                            + std::to_string(window));
        }
        auto const name = as_string(value, entry);
        auto const s    = target.alphabet().find(name);
        if (!s) {
          schema(entry, "unknown symbol '" + name + "'");
        }
        out.emplace_back(std::move(w), *s);
      }
      return out;
    }

    std::string cycle_notation(Alphabet const& alphabet, std::vector<Symbol> const& perm) {
      bool single = true;
      for (auto const& n : alphabet.names()) {
        single = single && n.size() == 1;
      }
      std::string       out;
      std::vector<bool> seen(perm.size(), false);
      for (Symbol a = 0; a < perm.size(); ++a) {
        if (seen[a] || perm[a] == a) {
          continue;
        }
        out += '(';
        for (Symbol x = a; !seen[x]; x = perm[x]) {
          seen[x] = true;
          if (x != a && !single) {
            out += ' ';
          }
          out += alphabet.name(x);
        }
        out += ')';
      }
      return out.empty() ? "()" : out;
    }

  }  // namespace

  Json load_file(std::filesystem::path const& path) {
    std::ifstream in(path);
    if (!in) {
      throw Error(ErrorCode::schema, "cannot open '" + path.string() + "'");
    }
    try {
      return Json::parse(in);
    } catch (nlohmann::json::parse_error const& e) {
      throw Error(ErrorCode::schema, "'" + path.string() + "': " + e.what());
    }
  }

  ////////////////////////////////////////////////////////////////////////////
  // Inputs
  ////////////////////////////////////////////////////////////////////////////

  CayleyTable table_from_json(Json const& j) {
    auto const  alphabet = alphabet_from(j, "");
    auto const& rows     = field(j, "table", "");
    if (!rows.is_array() || rows.size() != alphabet.size()) {
      schema("table", "expected " + std::to_string(alphabet.size()) + " rows");
    }
    std::vector<std::vector<std::string>> cells;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto const path = "table[" + std::to_string(i) + "]";
      cells.push_back(string_list(rows[i], path));
      if (cells.back().size() != alphabet.size()) {
        schema(path, "expected " + std::to_string(alphabet.size()) + " entries");
      }
      for (std::size_t k = 0; k < cells.back().size(); ++k) {
        if (!alphabet.find(cells.back()[k])) {
          schema(path + "[" + std::to_string(k) + "]",
                 "unknown symbol '" + cells.back()[k] + "'");
        }
      }
    }
    return CayleyTable::from_names(alphabet, cells);
  }

  Json to_json(CayleyTable const& table) {
    Json out;
    out["symbols"] = table.alphabet().names();
    out["table"]   = table.rows();
    return out;
  }

  MarkovShift shift_from_json(Json const& j, Alphabet const* full_over) {
    if (j.is_string() && j.get<std::string>() == "full") {
      if (full_over == nullptr) {
        schema("shift", "\"full\" needs an operation to take the alphabet from");
      }
      return MarkovShift::full(*full_over);
    }
    auto const  alphabet = alphabet_from(j, "");
    auto const& edges    = field(j, "edges", "");
    if (!edges.is_array()) {
      schema("edges", "expected an array of pairs");
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      auto const path = "edges[" + std::to_string(i) + "]";
      auto const e    = string_list(edges[i], path);
      if (e.size() != 2) {
        schema(path, "expected a pair");
      }
      for (auto const& name : e) {
        if (!alphabet.find(name)) {
          schema(path, "unknown symbol '" + name + "'");
        }
      }
      pairs.emplace_back(e[0], e[1]);
    }
    return MarkovShift::build(alphabet, pairs);
  }

  Json to_json(MarkovShift const& shift) {
    Json out;
    out["symbols"] = shift.alphabet().names();
    Json edges     = Json::array();
    for (auto e : shift.edges()) {
      edges.push_back(edge(shift.alphabet(), e));
    }
    out["edges"] = std::move(edges);
    if (!shift.pruned().empty()) {
      out["pruned"] = shift.pruned();
    }
    return out;
  }

  FiniteMemoryMeasure measure_from_json(Json const& j, MarkovShift const& shift) {
    auto const  type     = as_string(field(j, "type", ""), "type");
    auto const& alphabet = shift.alphabet();
    if (type == "parry") {
      return parry_measure(shift);
    }
    if (type == "bernoulli") {
      std::vector<double> p(shift.size(), 1.0 / static_cast<double>(shift.size()));
      if (auto it = j.find("p"); it != j.end()) {
        if (!it->is_object()) {
          schema("p", "expected an object of symbol -> probability");
        }
        std::fill(p.begin(), p.end(), 0.0);
        for (auto const& [name, value] : it->items()) {
          auto const s = alphabet.find(name);
          if (!s) {
            schema("p." + name, "unknown symbol");
          }
          p[*s] = as_double(value, "p." + name);
        }
      }
      return FiniteMemoryMeasure::bernoulli(shift, p);
    }
    if (type != "finite_memory") {
      schema("type", "expected finite_memory, parry or bernoulli, got '" + type + "'");
    }
    auto const depth  = as_size(field(j, "depth", ""), "depth");
    auto const states = depth == 0 ? std::vector<Word>{Word{}} : allowed_words(shift, depth);
    std::map<Word, std::size_t> index;
    for (std::size_t i = 0; i < states.size(); ++i) {
      index[states[i]] = i;
    }
    auto parse_state = [&](std::string const& key, std::string const& path) {
      Word w;
      if (!key.empty()) {
        try {
          w = alphabet.parse(key);
        } catch (Error const& e) {
          schema(path, e.what());
        }
      }
      auto it = index.find(w);
      if (it == index.end()) {
        schema(path, "not an allowed word of length " + std::to_string(depth));
      }
      return it->second;
    };

    auto const& kj = field(j, "kernel", "");
    if (!kj.is_object()) {
      schema("kernel", "expected an object of state -> distribution");
    }
    std::vector<std::vector<double>> kernel(states.size(),
                                            std::vector<double>(shift.size(), 0.0));
    std::vector<bool> seen(states.size(), false);
    for (auto const& [key, row] : kj.items()) {
      auto const path = "kernel." + key;
      auto const s    = parse_state(key, path);
      seen[s]         = true;
      if (!row.is_object()) {
        schema(path, "expected an object of symbol -> probability");
      }
      for (auto const& [name, value] : row.items()) {
        auto const a = alphabet.find(name);
        if (!a) {
          schema(path + "." + name, "unknown symbol");
        }
        kernel[s][*a] = as_double(value, path + "." + name);
      }
    }
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (!seen[s]) {
        schema("kernel", "missing state '" + alphabet.format(states[s]) + "'");
      }
    }
    std::optional<std::vector<double>> initial;
    if (auto it = j.find("initial"); it != j.end()) {
      if (!it->is_object()) {
        schema("initial", "expected an object of state -> probability");
      }
      initial.emplace(states.size(), 0.0);
      for (auto const& [key, value] : it->items()) {
        auto const path          = "initial." + key;
        (*initial)[parse_state(key, path)] = as_double(value, path);
      }
    }
    return FiniteMemoryMeasure::from_kernel(shift, depth, std::move(kernel), initial);
  }

  Json to_json(FiniteMemoryMeasure const& m) {
    auto const& alphabet = m.shift().alphabet();
    Json        out;
    out["type"]  = "finite_memory";
    out["depth"] = m.depth();
    Json kernel  = Json::object();
    Json initial = Json::object();
    for (std::size_t s = 0; s < m.states().size(); ++s) {
      auto const key = alphabet.format(m.states()[s]);
      Json       row = Json::object();
      for (Symbol a = 0; a < m.shift().size(); ++a) {
        if (m.kernel()[s][a] != 0) {
          row[alphabet.name(a)] = m.kernel()[s][a];
        }
      }
      kernel[key]  = std::move(row);
      initial[key] = m.initial()[s];
    }
    out["kernel"]               = std::move(kernel);
    out["initial"]              = std::move(initial);
    out["complete_connections"] = m.complete_connections();
    return out;
  }

  CellularAutomaton ca_from_json(Json const&                  j,
                                 std::filesystem::path const& base,
                                 bool                         strict) {
    auto const& sj = field(j, "shift", "");
    if (j.contains("op")) {
      auto const& op = j["op"];
      CayleyTable table;
      if (op.is_string()) {
        auto const ref = op.get<std::string>();
        if (auto fixture = fixture_table(ref)) {
          table = *fixture;
        } else {
          table = table_from_json(load_file(base / ref));
        }
      } else {
        table = table_from_json(op);
      }
      return CellularAutomaton::from_table(shift_from_json(sj, &table.alphabet()), table,
                                           strict);
    }
    std::optional<Alphabet> symbols;
    if (j.contains("symbols")) {
      symbols = alphabet_from(j, "");
    }
    auto const shift = shift_from_json(sj, symbols ? &*symbols : nullptr);
    auto const l     = as_size(field(j, "memory", ""), "memory");
    auto const r     = as_size(field(j, "anticipation", ""), "anticipation");
    auto       rule  = rule_entries(field(j, "rule", ""), shift, shift, l + r + 1, "rule");
    return CellularAutomaton(BlockCode::from_map(shift, shift, l, r, rule));
  }

  BlockCode code_from_json(Json const& j) {
    auto const source = shift_from_json(field(j, "source", ""));
    auto const target = shift_from_json(field(j, "target", ""));
    auto const l      = as_size(field(j, "memory", ""), "memory");
    auto const r      = as_size(field(j, "anticipation", ""), "anticipation");
    auto rule = rule_entries(field(j, "rule", ""), source, target, l + r + 1, "rule");
    return BlockCode::from_map(source, target, l, r, rule);
  }

  Json to_json(BlockCode const& code) {
    Json out;
    out["source"]       = to_json(code.source());
    out["target"]       = to_json(code.target());
    out["memory"]       = code.memory();
    out["anticipation"] = code.anticipation();
    Json rule           = Json::object();
    for (auto const& [w, s] : code.entries()) {
      rule[code.source().alphabet().format(w)] = code.target().alphabet().name(s);
    }
    out["rule"] = std::move(rule);
    return out;
  }

  ////////////////////////////////////////////////////////////////////////////
  // Reports
  ////////////////////////////////////////////////////////////////////////////

  Json to_json(Alphabet const& alphabet, Word const& word) {
    Json out = Json::array();
    for (auto s : word) {
      out.push_back(alphabet.name(s));
    }
    return out;
  }

  Json to_json(ShiftReport const& r) {
    Json out;
    out["irreducible"] = r.irreducible;
    out["mixing"]      = r.mixing;
    out["mixing_constant_q"]
        = r.mixing_constant_q ? Json(*r.mixing_constant_q) : Json(nullptr);
    out["entropy"]             = r.entropy;
    out["perron_root"]         = r.perron_root;
    out["num_words_by_length"] = r.num_words_by_length;
    out["pruned"]              = r.pruned;
    return out;
  }

  Json to_json(AlgebraReport const& r, Alphabet const& alphabet) {
    Json out;
    out["left_cancellable"]  = property(r.left_cancellable, alphabet);
    out["right_cancellable"] = property(r.right_cancellable, alphabet);
    out["quasigroup"]        = property(r.quasigroup, alphabet);
    out["commutative"]       = property(r.commutative, alphabet);
    out["associative"]       = property(r.associative, alphabet);
    out["medial"]            = property(r.medial, alphabet);
    return out;
  }

  Json to_json(PsiResult const& r, Alphabet const& alphabet) {
    Json out;
    out["psi_associative"] = r.psi.has_value();
    if (r.psi) {
      out["psi"]    = symbol_map(alphabet, alphabet, *r.psi);
      out["cycles"] = cycle_notation(alphabet, *r.psi);
      out["unique"] = r.unique;
    } else {
      out["psi"]        = nullptr;
      out["diagnostic"] = r.diagnostic;
      out["witness"]    = to_json(alphabet, r.witness);
    }
    return out;
  }

  Json to_json(ToyodaResult const& r, Alphabet const& alphabet) {
    Json out;
    out["found"] = r.decomposition.has_value();
    if (!r.decomposition) {
      out["reason"] = r.reason;
      return out;
    }
    auto const& d          = *r.decomposition;
    out["group"]           = to_json(d.group);
    out["zero"]            = alphabet.name(d.zero);
    out["eta"]             = symbol_map(alphabet, alphabet, d.eta);
    out["rho"]             = symbol_map(alphabet, alphabet, d.rho);
    out["constant"]        = alphabet.name(d.constant);
    out["primary_factors"] = d.primary_factors;
    return out;
  }

  Json to_json(RightStructure const& rs, Alphabet const& alphabet) {
    Json out;
    out["mode"] = rs.mode == StructureMode::psi_associative ? "psi" : "n_scaling";
    Json classes = Json::array();
    for (auto const& c : rs.classes) {
      classes.push_back(to_json(alphabet, c));
    }
    out["classes"]      = std::move(classes);
    out["class_table"]  = to_json(rs.class_table);
    out["idempotent"]   = symbol_map(alphabet, alphabet, rs.idempotent);
    out["identity_set"] = to_json(alphabet, rs.identity_set);
    out["s_b"]          = symbol_map(alphabet, alphabet, rs.s_b);
    out["psi"] = rs.psi ? symbol_map(alphabet, alphabet, *rs.psi) : Json(nullptr);
    return out;
  }

  Json to_json(ScCheck const& c, Alphabet const& alphabet) {
    Json out;
    out["compatible"] = c.compatible;
    if (c.witness) {
      Json w;
      w["x"]         = edge(alphabet, c.witness->first);
      w["y"]         = edge(alphabet, c.witness->second);
      w["image"]     = edge(alphabet, c.image);
      out["witness"] = std::move(w);
    } else {
      out["witness"] = nullptr;
    }
    return out;
  }

  Json to_json(CaFlags const& f) {
    Json out;
    out["left_permutative"]        = f.left_permutative;
    out["right_permutative"]       = f.right_permutative;
    out["bipermutative"]           = f.bipermutative;
    out["structurally_compatible"] = f.structurally_compatible;
    return out;
  }

  Json to_json(ScalingCheck const& c, Alphabet const& alphabet) {
    Json out;
    out["holds"]   = c.holds;
    out["witness"] = optional_word(alphabet, c.witness);
    return out;
  }

  Json to_json(ConjugacyCheck const& c, Alphabet const& alphabet) {
    Json out;
    out["verified"] = c.verified;
    out["depth"]    = c.depth;
    out["failure"]  = c.failure.empty() ? Json(nullptr) : Json(c.failure);
    out["witness"]  = optional_word(alphabet, c.witness);
    return out;
  }

  Json to_json(DecompositionCertificate const& c, Alphabet const& alphabet) {
    auto const& rs = c.hmm.structure;
    Json        out;
    out["mode"]      = c.mode == StructureMode::psi_associative ? "psi" : "n_scaling";
    out["scaling_n"] = c.scaling_n ? Json(*c.scaling_n) : Json(nullptr);
    out["structure"] = to_json(rs, alphabet);
    out["u"]         = symbol_map(alphabet, c.hmm.product_alphabet, c.hmm.u);
    out["product_table"] = to_json(c.hmm.product_table);
    out["lambda"]        = to_json(c.lambda);
    out["k_shift"]       = to_json(c.k_shift);
    out["b_shift"]       = to_json(c.b_shift);
    out["k_order"]       = rs.classes.size();
    out["b_set"]         = to_json(alphabet, rs.identity_set);
    out["class_identity"] = c.class_identity
                                ? Json(rs.class_table.alphabet().name(*c.class_identity))
                                : Json(nullptr);
    out["class_group_factors"] = c.class_group_factors;
    out["period_m"]            = c.period_m;
    out["exponent_l"]          = c.exponent_l;
    out["product_verified"]    = c.product_verified;
    if (c.missing_edge) {
      Json m;
      m["k_edge"]         = edge(c.k_shift.alphabet(), c.missing_edge->first);
      m["b_edge"]         = edge(c.b_shift.alphabet(), c.missing_edge->second);
      out["missing_edge"] = std::move(m);
    } else {
      out["missing_edge"] = nullptr;
    }
    Json inverse = Json::object();
    for (auto const& [w, s] : c.u_inverse.entries()) {
      inverse[c.lambda.alphabet().format(w)] = alphabet.name(s);
    }
    out["u_inverse"] = std::move(inverse);
    out["conjugacy"] = to_json(c.conjugacy, alphabet);
    return out;
  }

  Json to_json(InvarianceReport const& r, Alphabet const& alphabet) {
    Json out;
    out["invariant"]     = r.invariant;
    out["max_deviation"] = r.max_deviation;
    out["worst"]         = optional_word(alphabet, r.worst);
    Json dev             = Json::object();
    for (auto const& [w, d] : r.deviations) {
      dev[alphabet.format(w)] = d;
    }
    out["deviations"] = std::move(dev);
    return out;
  }

  Json to_json(CesaroReport const& r, Alphabet const& alphabet) {
    Json out;
    out["mode"]   = r.mode == CesaroMode::exact ? "exact" : "monte_carlo";
    out["engine"] = r.engine;
    out["steps"]  = r.steps;
    if (r.samples > 0) {
      out["samples"] = r.samples;
      out["seed"]    = r.seed;
    }
    out["truncated"] = r.truncated;
    out["first_infeasible_step"]
        = r.first_infeasible_step ? Json(*r.first_infeasible_step) : Json(nullptr);
    out["final_deviation"] = r.final_deviation ? Json(*r.final_deviation) : Json(nullptr);
    out["regular"]         = r.regular ? Json(*r.regular) : Json(nullptr);
    out["simple"]          = r.simple ? Json(*r.simple) : Json(nullptr);
    Json series            = Json::array();
    for (auto const& s : r.series) {
      Json e;
      e["word"]        = alphabet.format(s.word);
      e["parry"]       = s.parry ? Json(*s.parry) : Json(nullptr);
      e["values"]      = s.values;
      e["averages"]    = s.averages;
      e["half_widths"] = s.half_widths;
      Json exact       = Json::array();
      for (bool b : s.exact) {
        exact.push_back(b);
      }
      e["exact"] = std::move(exact);
      series.push_back(std::move(e));
    }
    out["series"] = std::move(series);
    return out;
  }

  Json to_json(Comparison const& c) {
    Json out;
    out["verdict"]         = std::string(to_string(c.verdict));
    out["word_length"]     = c.word_length;
    out["final_deviation"] = c.final_deviation;
    out["deviations"]      = c.deviations;
    return out;
  }

  std::string cesaro_csv(CesaroReport const& r, Alphabet const& alphabet) {
    auto num = [](double v) {
      std::array<char, 32> buf{};
      auto const end = std::to_chars(buf.data(), buf.data() + buf.size(), v).ptr;
      return std::string(buf.data(), end);
    };
    std::ostringstream out;
    out << "word,n,value,cesaro,half_width\n";
    for (auto const& s : r.series) {
      auto const word = alphabet.format(s.word);
      for (std::size_t n = 0; n < s.values.size(); ++n) {
        out << '"' << word << "\"," << n << ',' << num(s.values[n]) << ','
            << num(s.averages[n]) << ',' << num(s.half_widths[n]) << '\n';
      }
    }
    return out.str();
  }

}  // namespace tmca::json_io
