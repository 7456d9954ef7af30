#pragma once

// Topological Markov chains: alphabets, edge relations, allowed words and the
// combinatorial / spectral data of the edge digraph.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tmca {

  using Symbol = std::uint32_t;
  using Word   = std::vector<Symbol>;
  using Edge   = std::pair<Symbol, Symbol>;

  inline constexpr Symbol no_symbol = std::numeric_limits<Symbol>::max();

  // Default cap on materialised word lists; overridden by TMCA_ENUM_CAP.
  inline constexpr std::uint64_t default_enumeration_cap = 10'000'000;

  [[nodiscard]] std::uint64_t enumeration_cap();

  // Ordered finite set of distinct symbol names. Symbols are indices into the
  // input order.
  class Alphabet {
   public:
    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> names);

    [[nodiscard]] std::size_t size() const noexcept {
      return _names.size();
    }
    [[nodiscard]] std::string const& name(Symbol s) const {
      return _names.at(s);
    }
    [[nodiscard]] std::vector<std::string> const& names() const noexcept {
      return _names;
    }
    [[nodiscard]] std::optional<Symbol> find(std::string_view name) const;
    // Throws unknown_symbol.
    [[nodiscard]] Symbol at(std::string_view name) const;

    // Words over single-character alphabets print without separators ("0110");
    // otherwise symbols are space separated.
    [[nodiscard]] std::string format(std::span<Symbol const> word) const;
    [[nodiscard]] Word parse(std::string_view text) const;

    friend bool operator==(Alphabet const& a, Alphabet const& b) {
      return a._names == b._names;
    }

   private:
    std::vector<std::string> _names;
    std::map<std::string, Symbol, std::less<>> _index;
    bool _single_char = true;
  };

  // A 1-step subshift of finite type given by an edge relation. Construction
  // iteratively removes symbols with no outgoing or no incoming edge, so every
  // remaining symbol lies on a bi-infinite walk. Removed names are recorded.
  class MarkovShift {
   public:
    MarkovShift() = default;

    // Edges are given by name. Throws unknown_symbol, empty_shift.
    static MarkovShift build(
        Alphabet const&                                         alphabet,
        std::vector<std::pair<std::string, std::string>> const& edges);
    // Edges are indices into `alphabet`.
    static MarkovShift from_edges(Alphabet const&          alphabet,
                                  std::vector<Edge> const& edges);
    static MarkovShift full(Alphabet const& alphabet);

    [[nodiscard]] Alphabet const& alphabet() const noexcept {
      return _alphabet;
    }
    [[nodiscard]] std::size_t size() const noexcept {
      return _alphabet.size();
    }
    [[nodiscard]] bool has_edge(Symbol a, Symbol b) const noexcept {
      return _adjacency[a * size() + b] != 0;
    }
    // Lexicographically sorted.
    [[nodiscard]] std::vector<Edge> const& edges() const noexcept {
      return _edges;
    }
    [[nodiscard]] std::vector<Symbol> const& followers(Symbol a) const {
      return _followers.at(a);
    }
    [[nodiscard]] std::vector<Symbol> const& predecessors(Symbol a) const {
      return _predecessors.at(a);
    }
    [[nodiscard]] std::vector<std::string> const& pruned() const noexcept {
      return _pruned;
    }
    [[nodiscard]] bool is_full() const noexcept {
      return _edges.size() == size() * size();
    }
    [[nodiscard]] bool is_allowed(std::span<Symbol const> word) const noexcept;

    friend bool operator==(MarkovShift const& a, MarkovShift const& b) {
      return a._alphabet == b._alphabet && a._edges == b._edges;
    }

   private:
    Alphabet                         _alphabet;
    std::vector<std::uint8_t>        _adjacency;
    std::vector<Edge>                _edges;
    std::vector<std::vector<Symbol>> _followers;
    std::vector<std::vector<Symbol>> _predecessors;
    std::vector<std::string>         _pruned;
  };

  // Number of allowed words of length k (sum of the entries of A^(k-1)),
  // saturating at UINT64_MAX.
  [[nodiscard]] std::uint64_t count_allowed_words(MarkovShift const& shift,
                                                  std::size_t        k);

  // Visits every allowed word of length k in lexicographic order. No cap.
  template <typename Visitor>
  void for_each_allowed_word(MarkovShift const& shift,
                             std::size_t        k,
                             Visitor&&          visit) {
    if (k == 0 || shift.size() == 0) {
      return;
    }
    Word                     word(k);
    std::vector<std::size_t> cursor(k, 0);
    std::size_t              depth = 0;
    // cursor[i] indexes the candidate list for position i: the alphabet at
    // i == 0, followers of word[i - 1] otherwise.
    while (true) {
      std::size_t const candidates_size
          = depth == 0 ? shift.size() : shift.followers(word[depth - 1]).size();
      if (cursor[depth] == candidates_size) {
        if (depth == 0) {
          return;
        }
        cursor[depth] = 0;
        --depth;
        ++cursor[depth];
        continue;
      }
      word[depth] = depth == 0
                        ? static_cast<Symbol>(cursor[0])
                        : shift.followers(word[depth - 1])[cursor[depth]];
      if (depth + 1 == k) {
        visit(std::span<Symbol const>(word));
        ++cursor[depth];
      } else {
        ++depth;
      }
    }
  }

  // Lexicographically ordered; throws depth_too_large above enumeration_cap().
  [[nodiscard]] std::vector<Word> allowed_words(MarkovShift const& shift,
                                                std::size_t        k);

  // Symbols that may follow (precede) an allowed word. Throws not_allowed.
  [[nodiscard]] std::vector<Symbol> follower_set(MarkovShift const&      shift,
                                                 std::span<Symbol const> word);
  [[nodiscard]] std::vector<Symbol>
  predecessor_set(MarkovShift const& shift, std::span<Symbol const> word);

  // Strongly connected components of the edge digraph, each sorted, listed in
  // order of their smallest symbol.
  [[nodiscard]] std::vector<std::vector<Symbol>>
  strongly_connected_components(MarkovShift const& shift);

  [[nodiscard]] bool is_irreducible(MarkovShift const& shift);

  // Smallest q with A^q > 0 entrywise, if A is primitive. The search stops at
  // the Wielandt bound (n-1)^2 + 1.
  [[nodiscard]] std::optional<unsigned> primitivity_exponent(
      MarkovShift const& shift);

  struct PerronData {
    double              root = 0;
    std::vector<double> right;  // A v = root v, max entry 1
    std::vector<double> left;   // u A = root u, max entry 1
  };

  inline constexpr double      perron_tolerance      = 1e-12;
  inline constexpr std::size_t perron_iteration_cap  = 100'000;

  // Perron root and eigenvectors of an irreducible shift's adjacency matrix.
  // Throws not_irreducible.
  [[nodiscard]] PerronData perron_data(MarkovShift const& shift);

  // Spectral radius of the adjacency matrix (max over strongly connected
  // components).
  [[nodiscard]] double spectral_radius(MarkovShift const& shift);

  struct ShiftReport {
    bool                       irreducible = false;
    bool                       mixing      = false;
    std::optional<unsigned>    mixing_constant_q;
    double                     entropy = 0;  // natural log
    double                     perron_root = 0;
    std::vector<std::uint64_t> num_words_by_length;  // entry k-1 is |G_k|
    std::vector<std::string>   pruned;
  };

  [[nodiscard]] ShiftReport shift_report(MarkovShift const& shift,
                                         std::size_t        depth);

}  // namespace tmca
