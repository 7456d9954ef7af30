#include <algorithm>
#include <map>

#include "tmca/ca.hpp"
#include "tmca/error.hpp"

namespace tmca {

  namespace {
    constexpr std::uint64_t dense_limit = std::uint64_t{1} << 24;
  }

  BlockCode::BlockCode(MarkovShift source,
                       MarkovShift target,
                       std::size_t memory,
                       std::size_t anticipation,
                       Rule const& rule)
      : _source(std::move(source)),
        _target(std::move(target)),
        _memory(memory),
        _anticipation(anticipation) {
    auto const n     = static_cast<std::uint64_t>(_source.size());
    auto const L     = window();
    std::uint64_t space = 1;
    for (std::size_t i = 0; i < L; ++i) {
      if (space > std::numeric_limits<std::uint64_t>::max() / n) {
        throw Error(ErrorCode::depth_too_large,
                    "window length " + std::to_string(L)
                        + " overflows the window key space");
      }
      space *= n;
    }
    auto const count = count_allowed_words(_source, L);
    if (count > enumeration_cap()) {
      throw Error(ErrorCode::depth_too_large,
                  std::to_string(count) + " allowed windows of length "
                      + std::to_string(L) + " exceed the enumeration cap");
    }
    _dense = space <= dense_limit;
    if (_dense) {
      _table.assign(space, no_symbol);
    } else {
      _sparse.reserve(count);
    }
    for_each_allowed_word(_source, L, [&](std::span<Symbol const> w) {
      auto const value = rule(w);
      if (value >= _target.size()) {
        throw Error(ErrorCode::unknown_symbol,
                    "rule image of " + _source.alphabet().format(w)
                        + " is outside the target alphabet");
      }
      auto const k = *key(w);
      if (_dense) {
        _table[k] = value;
      } else {
        _sparse.emplace_back(k, value);
      }
    });
    // Lexicographic enumeration makes the sparse keys ascending already.
  }

  BlockCode
  BlockCode::from_map(MarkovShift                                 source,
                      MarkovShift                                 target,
                      std::size_t                                 memory,
                      std::size_t                                 anticipation,
                      std::vector<std::pair<Word, Symbol>> const& rule) {
    std::map<Word, Symbol> lookup(rule.begin(), rule.end());
    Alphabet const         alphabet = source.alphabet();
    return BlockCode(std::move(source),
                     std::move(target),
                     memory,
                     anticipation,
                     [&](std::span<Symbol const> w) {
                       auto it = lookup.find(Word(w.begin(), w.end()));
                       if (it == lookup.end()) {
                         throw Error(ErrorCode::schema,
                                     "rule is not total: no value for window '"
                                         + alphabet.format(w) + "'");
                       }
                       return it->second;
                     });
  }

  BlockCode BlockCode::from_symbol_map(MarkovShift                source,
                                       MarkovShift                target,
                                       std::vector<Symbol> const& map) {
    if (map.size() != source.size()) {
      throw Error(ErrorCode::schema, "symbol map size differs from the alphabet");
    }
    return BlockCode(std::move(source),
                     std::move(target),
                     0,
                     0,
                     [&](std::span<Symbol const> w) { return map[w[0]]; });
  }

  std::optional<std::uint64_t>
  BlockCode::key(std::span<Symbol const> w) const noexcept {
    if (w.size() != window()) {
      return std::nullopt;
    }
    std::uint64_t k = 0;
    auto const    n = _source.size();
    for (auto s : w) {
      if (s >= n) {
        return std::nullopt;
      }
      k = k * n + s;
    }
    return k;
  }

  std::optional<Symbol>
  BlockCode::find(std::span<Symbol const> w) const noexcept {
    auto const k = key(w);
    if (!k) {
      return std::nullopt;
    }
    if (_dense) {
      auto v = _table[*k];
      return v == no_symbol ? std::nullopt : std::optional<Symbol>(v);
    }
    auto it = std::lower_bound(
        _sparse.begin(),
        _sparse.end(),
        *k,
        [](auto const& entry, std::uint64_t value) { return entry.first < value; });
    if (it == _sparse.end() || it->first != *k) {
      return std::nullopt;
    }
    return it->second;
  }

  Symbol BlockCode::at(std::span<Symbol const> w) const {
    if (auto v = find(w)) {
      return *v;
    }
    throw Error(ErrorCode::not_allowed,
                "window '" + _source.alphabet().format(w)
                    + "' is not an allowed window of the code");
  }

  Word BlockCode::apply(std::span<Symbol const> word) const {
    auto const L = window();
    if (word.size() < L) {
      throw Error(ErrorCode::invalid_argument,
                  "word shorter than the code window");
    }
    Word out(word.size() - L + 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = at(word.subspan(i, L));
    }
    return out;
  }

  std::optional<Word> BlockCode::image_edge_violation() const {
    std::optional<Word> found;
    if (count_allowed_words(_source, window() + 1) > enumeration_cap()) {
      throw Error(ErrorCode::depth_too_large,
                  "too many words to check the image edges");
    }
    for_each_allowed_word(_source, window() + 1, [&](std::span<Symbol const> w) {
      if (found) {
        return;
      }
      auto const x = at(w.first(window()));
      auto const y = at(w.last(window()));
      if (!_target.has_edge(x, y)) {
        found = Word(w.begin(), w.end());
      }
    });
    return found;
  }

  std::vector<std::pair<Word, Symbol>> BlockCode::entries() const {
    std::vector<std::pair<Word, Symbol>> out;
    for_each_allowed_word(_source, window(), [&](std::span<Symbol const> w) {
      out.emplace_back(Word(w.begin(), w.end()), at(w));
    });
    return out;
  }

  BlockCode compose(BlockCode const& outer, BlockCode const& inner) {
    if (!(outer.source() == inner.target())) {
      throw Error(ErrorCode::invalid_argument,
                  "composition: inner target differs from outer source");
    }
    return BlockCode(inner.source(),
                     outer.target(),
                     outer.memory() + inner.memory(),
                     outer.anticipation() + inner.anticipation(),
                     [&](std::span<Symbol const> w) {
                       auto const mid = inner.apply(w);
                       if (!outer.source().is_allowed(mid)) {
                         throw Error(ErrorCode::not_closed,
                                     "intermediate image '"
                                         + inner.target().alphabet().format(mid)
                                         + "' is not allowed");
                       }
                       return outer.at(mid);
                     });
  }

  std::vector<Word> preimage_cylinder(BlockCode const&        code,
                                      std::span<Symbol const> word) {
    if (word.empty() || !code.target().is_allowed(word)) {
      throw Error(ErrorCode::not_allowed,
                  "word is not allowed in the code's target");
    }
    auto const& source = code.source();
    auto const  L      = code.window();
    auto const  length = word.size() + L - 1;
    auto const  count  = count_allowed_words(source, length);
    if (count > enumeration_cap()) {
      throw Error(ErrorCode::depth_too_large,
                  std::to_string(count) + " candidate preimages exceed the "
                      "enumeration cap");
    }
    std::vector<Word> out;
    Word              v(length);
    auto              extend = [&](auto& self, std::size_t p) -> void {
      if (p == length) {
        out.push_back(v);
        return;
      }
      auto try_symbol = [&](Symbol s) {
        v[p] = s;
        if (p + 1 >= L
            && code.at(std::span<Symbol const>(v).subspan(p + 1 - L, L))
                   != word[p + 1 - L]) {
          return;
        }
        self(self, p + 1);
      };
      if (p == 0) {
        for (Symbol s = 0; s < source.size(); ++s) {
          try_symbol(s);
        }
      } else {
        for (auto s : source.followers(v[p - 1])) {
          try_symbol(s);
        }
      }
    };
    extend(extend, 0);
    return out;
  }

}  // namespace tmca
