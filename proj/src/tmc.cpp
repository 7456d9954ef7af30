#include "tmca/tmc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>

#include "tmca/error.hpp"

namespace tmca {

  std::uint64_t enumeration_cap() {
    if (char const* env = std::getenv("TMCA_ENUM_CAP")) {
      char*      end   = nullptr;
      auto const value = std::strtoull(env, &end, 10);
      if (end != env && *end == '\0' && value > 0) {
        return value;
      }
    }
    return default_enumeration_cap;
  }

  ////////////////////////////////////////////////////////////////////////
  // Alphabet
  ////////////////////////////////////////////////////////////////////////

  Alphabet::Alphabet(std::vector<std::string> names) : _names(std::move(names)) {
    if (_names.empty()) {
      throw Error(ErrorCode::empty_shift, "alphabet must not be empty");
    }
    for (Symbol s = 0; s < _names.size(); ++s) {
      auto const& n = _names[s];
      if (n.empty()) {
        throw Error(ErrorCode::schema, "symbol names must be non-empty");
      }
      if (std::any_of(n.begin(), n.end(), [](unsigned char c) {
            return std::isspace(c) != 0;
          })) {
        throw Error(ErrorCode::schema,
                    "symbol name '" + n + "' contains whitespace");
      }
      if (!_index.emplace(n, s).second) {
        throw Error(ErrorCode::duplicate_symbol, "duplicate symbol '" + n + "'");
      }
      _single_char = _single_char && n.size() == 1;
    }
  }

  std::optional<Symbol> Alphabet::find(std::string_view name) const {
    auto it = _index.find(name);
    if (it == _index.end()) {
      return std::nullopt;
    }
    return it->second;
  }

  Symbol Alphabet::at(std::string_view name) const {
    if (auto s = find(name)) {
      return *s;
    }
    throw Error(ErrorCode::unknown_symbol,
                "unknown symbol '" + std::string(name) + "'");
  }

  std::string Alphabet::format(std::span<Symbol const> word) const {
    std::string out;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (i > 0 && !_single_char) {
        out += ' ';
      }
      out += name(word[i]);
    }
    return out;
  }

  Word Alphabet::parse(std::string_view text) const {
    Word word;
    bool has_space = std::any_of(text.begin(), text.end(), [](unsigned char c) {
      return std::isspace(c) != 0;
    });
    if (has_space) {
      std::size_t i = 0;
      while (i < text.size()) {
        while (i < text.size()
               && std::isspace(static_cast<unsigned char>(text[i]))) {
          ++i;
        }
        std::size_t j = i;
        while (j < text.size()
               && !std::isspace(static_cast<unsigned char>(text[j]))) {
          ++j;
        }
        if (j > i) {
          word.push_back(at(text.substr(i, j - i)));
        }
        i = j;
      }
    } else if (_single_char) {
      for (char c : text) {
        word.push_back(at(std::string_view(&c, 1)));
      }
    } else if (!text.empty()) {
      word.push_back(at(text));
    }
    return word;
  }

  ////////////////////////////////////////////////////////////////////////
  // MarkovShift
  ////////////////////////////////////////////////////////////////////////

  MarkovShift
  MarkovShift::build(Alphabet const&                                         alphabet,
                     std::vector<std::pair<std::string, std::string>> const& edges) {
    std::vector<Edge> indexed;
    indexed.reserve(edges.size());
    for (auto const& [a, b] : edges) {
      indexed.emplace_back(alphabet.at(a), alphabet.at(b));
    }
    return from_edges(alphabet, indexed);
  }

  MarkovShift MarkovShift::from_edges(Alphabet const&          alphabet,
                                      std::vector<Edge> const& edges) {
    auto const n = alphabet.size();
    if (edges.empty()) {
      throw Error(ErrorCode::empty_shift, "edge set is empty");
    }
    std::set<Edge> live;
    for (auto const& e : edges) {
      if (e.first >= n || e.second >= n) {
        throw Error(ErrorCode::unknown_symbol, "edge endpoint out of range");
      }
      live.insert(e);
    }
    std::vector<bool> alive(n, true);
    // Fixpoint: drop symbols without an outgoing or incoming live edge.
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<bool> has_out(n, false), has_in(n, false);
      for (auto const& [a, b] : live) {
        has_out[a] = true;
        has_in[b]  = true;
      }
      for (Symbol s = 0; s < n; ++s) {
        if (alive[s] && (!has_out[s] || !has_in[s])) {
          alive[s] = false;
          changed  = true;
        }
      }
      std::erase_if(live, [&](Edge const& e) {
        return !alive[e.first] || !alive[e.second];
      });
    }
    if (live.empty()) {
      throw Error(ErrorCode::empty_shift,
                  "pruning symbols without bi-infinite walks leaves nothing");
    }

    MarkovShift              shift;
    std::vector<std::string> names;
    std::vector<Symbol>      relabel(n, no_symbol);
    for (Symbol s = 0; s < n; ++s) {
      if (alive[s]) {
        relabel[s] = static_cast<Symbol>(names.size());
        names.push_back(alphabet.name(s));
      } else {
        shift._pruned.push_back(alphabet.name(s));
      }
    }
    shift._alphabet = Alphabet(std::move(names));
    auto const m    = shift._alphabet.size();
    shift._adjacency.assign(m * m, 0);
    shift._followers.assign(m, {});
    shift._predecessors.assign(m, {});
    for (auto const& [a, b] : live) {
      Symbol const x = relabel[a], y = relabel[b];
      shift._adjacency[x * m + y] = 1;
      shift._edges.emplace_back(x, y);
    }
    std::sort(shift._edges.begin(), shift._edges.end());
    for (auto const& [x, y] : shift._edges) {
      shift._followers[x].push_back(y);
      shift._predecessors[y].push_back(x);
    }
    for (auto& p : shift._predecessors) {
      std::sort(p.begin(), p.end());
    }
    return shift;
  }

  MarkovShift MarkovShift::full(Alphabet const& alphabet) {
    std::vector<Edge> edges;
    for (Symbol a = 0; a < alphabet.size(); ++a) {
      for (Symbol b = 0; b < alphabet.size(); ++b) {
        edges.emplace_back(a, b);
      }
    }
    return from_edges(alphabet, edges);
  }

  bool MarkovShift::is_allowed(std::span<Symbol const> word) const noexcept {
    for (auto s : word) {
      if (s >= size()) {
        return false;
      }
    }
    for (std::size_t i = 1; i < word.size(); ++i) {
      if (!has_edge(word[i - 1], word[i])) {
        return false;
      }
    }
    return true;
  }

  ////////////////////////////////////////////////////////////////////////
  // Words
  ////////////////////////////////////////////////////////////////////////

  std::uint64_t count_allowed_words(MarkovShift const& shift, std::size_t k) {
    if (k == 0) {
      return 1;
    }
    constexpr auto             top = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::uint64_t> ending(shift.size(), 1);
    for (std::size_t step = 1; step < k; ++step) {
      std::vector<std::uint64_t> next(shift.size(), 0);
      for (auto const& [a, b] : shift.edges()) {
        next[b] = ending[a] > top - next[b] ? top : next[b] + ending[a];
      }
      ending = std::move(next);
    }
    std::uint64_t total = 0;
    for (auto c : ending) {
      total = c > top - total ? top : total + c;
    }
    return total;
  }

  std::vector<Word> allowed_words(MarkovShift const& shift, std::size_t k) {
    if (k == 0) {
      throw Error(ErrorCode::invalid_argument, "word length must be positive");
    }
    auto const count = count_allowed_words(shift, k);
    if (count > enumeration_cap()) {
      throw Error(ErrorCode::depth_too_large,
                  std::to_string(count) + " allowed words of length "
                      + std::to_string(k) + " exceed the enumeration cap "
                      + std::to_string(enumeration_cap()));
    }
    std::vector<Word> words;
    words.reserve(count);
    for_each_allowed_word(shift, k, [&](std::span<Symbol const> w) {
      words.emplace_back(w.begin(), w.end());
    });
    return words;
  }

  namespace {
    void require_allowed(MarkovShift const& shift, std::span<Symbol const> word) {
      if (word.empty()) {
        throw Error(ErrorCode::invalid_argument, "word must be non-empty");
      }
      if (!shift.is_allowed(word)) {
        throw Error(ErrorCode::not_allowed,
                    "word is not allowed in the shift");
      }
    }
  }  // namespace

  std::vector<Symbol> follower_set(MarkovShift const&      shift,
                                   std::span<Symbol const> word) {
    require_allowed(shift, word);
    return shift.followers(word.back());
  }

  std::vector<Symbol> predecessor_set(MarkovShift const&      shift,
                                      std::span<Symbol const> word) {
    require_allowed(shift, word);
    return shift.predecessors(word.front());
  }

  ////////////////////////////////////////////////////////////////////////
  // Graph structure
  ////////////////////////////////////////////////////////////////////////

  std::vector<std::vector<Symbol>>
  strongly_connected_components(MarkovShift const& shift) {
    // Iterative Tarjan.
    auto const               n = shift.size();
    std::vector<int>         index(n, -1), low(n, 0);
    std::vector<bool>        on_stack(n, false);
    std::vector<Symbol>      stack;
    std::vector<std::vector<Symbol>> components;
    int                      counter = 0;

    struct Frame {
      Symbol      v;
      std::size_t next;
    };
    for (Symbol root = 0; root < n; ++root) {
      if (index[root] != -1) {
        continue;
      }
      std::vector<Frame> call{{root, 0}};
      index[root] = low[root] = counter++;
      stack.push_back(root);
      on_stack[root] = true;
      while (!call.empty()) {
        auto&       frame = call.back();
        auto const& succ  = shift.followers(frame.v);
        if (frame.next < succ.size()) {
          Symbol w = succ[frame.next++];
          if (index[w] == -1) {
            index[w] = low[w] = counter++;
            stack.push_back(w);
            on_stack[w] = true;
            call.push_back({w, 0});
          } else if (on_stack[w]) {
            low[frame.v] = std::min(low[frame.v], index[w]);
          }
          continue;
        }
        Symbol v = frame.v;
        call.pop_back();
        if (!call.empty()) {
          low[call.back().v] = std::min(low[call.back().v], low[v]);
        }
        if (low[v] == index[v]) {
          std::vector<Symbol> comp;
          Symbol              w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp.push_back(w);
          } while (w != v);
          std::sort(comp.begin(), comp.end());
          components.push_back(std::move(comp));
        }
      }
    }
    std::sort(components.begin(),
              components.end(),
              [](auto const& a, auto const& b) { return a.front() < b.front(); });
    return components;
  }

  bool is_irreducible(MarkovShift const& shift) {
    return strongly_connected_components(shift).size() == 1;
  }

  std::optional<unsigned> primitivity_exponent(MarkovShift const& shift) {
    if (!is_irreducible(shift)) {
      return std::nullopt;
    }
    auto const  n     = shift.size();
    std::size_t words = (n + 63) / 64;
    using Row         = std::vector<std::uint64_t>;
    std::vector<Row> adjacency(n, Row(words, 0));
    for (auto const& [a, b] : shift.edges()) {
      adjacency[a][b / 64] |= std::uint64_t{1} << (b % 64);
    }
    auto full = [&](std::vector<Row> const& m) {
      for (auto const& row : m) {
        for (std::size_t i = 0; i < n; ++i) {
          if (((row[i / 64] >> (i % 64)) & 1U) == 0) {
            return false;
          }
        }
      }
      return true;
    };
    auto const       bound = static_cast<unsigned>((n - 1) * (n - 1) + 1);
    std::vector<Row> power = adjacency;
    for (unsigned q = 1; q <= bound; ++q) {
      if (full(power)) {
        return q;
      }
      std::vector<Row> next(n, Row(words, 0));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if ((power[i][j / 64] >> (j % 64)) & 1U) {
            for (std::size_t w = 0; w < words; ++w) {
              next[i][w] |= adjacency[j][w];
            }
          }
        }
      }
      power = std::move(next);
    }
    return std::nullopt;
  }

  namespace {
    // Power iteration for the Perron vector of the irreducible nonnegative
    // matrix restricted to `nodes`. Iterates with A + I, which is primitive,
    // so periodic components converge too.
    std::pair<double, std::vector<double>>
    power_iterate(MarkovShift const&         shift,
                  std::vector<Symbol> const& nodes,
                  bool                       transpose) {
      auto const          m = nodes.size();
      std::vector<Symbol> position(shift.size(), no_symbol);
      for (std::size_t i = 0; i < m; ++i) {
        position[nodes[i]] = static_cast<Symbol>(i);
      }
      std::vector<double> v(m, 1.0), w(m);
      double              top = 1.0;
      for (std::size_t it = 0; it < perron_iteration_cap; ++it) {
        w = v;
        for (std::size_t i = 0; i < m; ++i) {
          auto const& next = transpose ? shift.predecessors(nodes[i])
                                       : shift.followers(nodes[i]);
          for (auto s : next) {
            if (position[s] != no_symbol) {
              w[i] += v[position[s]];
            }
          }
        }
        top = *std::max_element(w.begin(), w.end());
        double diff = 0;
        for (std::size_t i = 0; i < m; ++i) {
          w[i] /= top;
          diff = std::max(diff, std::abs(w[i] - v[i]));
        }
        v.swap(w);
        if (diff <= perron_tolerance) {
          break;
        }
      }
      return {top - 1.0, v};
    }

    bool has_cycle(MarkovShift const& shift, std::vector<Symbol> const& comp) {
      return comp.size() > 1 || shift.has_edge(comp.front(), comp.front());
    }
  }  // namespace

  PerronData perron_data(MarkovShift const& shift) {
    if (!is_irreducible(shift)) {
      throw Error(ErrorCode::not_irreducible, "shift is not irreducible");
    }
    std::vector<Symbol> all(shift.size());
    std::iota(all.begin(), all.end(), Symbol{0});
    auto [root, right] = power_iterate(shift, all, false);
    auto [root_left, left] = power_iterate(shift, all, true);
    (void) root_left;
    return {root, std::move(right), std::move(left)};
  }

  double spectral_radius(MarkovShift const& shift) {
    double radius = 0;
    for (auto const& comp : strongly_connected_components(shift)) {
      if (has_cycle(shift, comp)) {
        radius = std::max(radius, power_iterate(shift, comp, false).first);
      }
    }
    return radius;
  }

  ShiftReport shift_report(MarkovShift const& shift, std::size_t depth) {
    ShiftReport report;
    report.irreducible       = is_irreducible(shift);
    report.mixing_constant_q = primitivity_exponent(shift);
    report.mixing            = report.mixing_constant_q.has_value();
    report.perron_root       = spectral_radius(shift);
    report.entropy           = std::log(report.perron_root);
    if (report.entropy < 0) {
      report.entropy = 0;
    }
    for (std::size_t k = 1; k <= depth; ++k) {
      report.num_words_by_length.push_back(count_allowed_words(shift, k));
    }
    report.pruned = shift.pruned();
    return report;
  }

}  // namespace tmca
