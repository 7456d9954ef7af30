#pragma once

// JSON schemas for inputs and reports. Parse errors throw Error(schema) with
// the offending field in the message.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "tmca/algebra.hpp"
#include "tmca/ca.hpp"
#include "tmca/cesaro.hpp"
#include "tmca/factor.hpp"
#include "tmca/measure.hpp"
#include "tmca/tmc.hpp"

namespace tmca::json_io {

  using Json = nlohmann::ordered_json;

  // Reads and parses a file; throws schema on I/O or syntax errors.
  [[nodiscard]] Json load_file(std::filesystem::path const& path);

  // {"symbols": [...], "table": [[...], ...]}
  [[nodiscard]] CayleyTable table_from_json(Json const& j);
  [[nodiscard]] Json        to_json(CayleyTable const& table);

  // {"symbols": [...], "edges": [[a, b], ...]} or the string "full", which
  // needs `full_over`.
  [[nodiscard]] MarkovShift shift_from_json(Json const&     j,
                                            Alphabet const* full_over = nullptr);
  [[nodiscard]] Json        to_json(MarkovShift const& shift);

  // {"type": "finite_memory", "depth": d, "kernel": {...}, "initial": {...}},
  // {"type": "parry"}, {"type": "bernoulli", "p": {...}} (uniform when p is
  // omitted). Kernel keys are formatted d-words ("" for d = 0).
  [[nodiscard]] FiniteMemoryMeasure measure_from_json(Json const&        j,
                                                      MarkovShift const& shift);
  [[nodiscard]] Json                to_json(FiniteMemoryMeasure const& m);

  // {"shift": <shift or "full">, "op": <table object or file reference>} or
  // {"shift": ..., "memory": l, "anticipation": r, "rule": {"ab": "c"}}.
  // File references resolve against `base`.
  [[nodiscard]] CellularAutomaton ca_from_json(Json const&                  j,
                                               std::filesystem::path const& base,
                                               bool strict = true);

  // {"source": shift, "target": shift, "memory", "anticipation", "rule"}.
  [[nodiscard]] BlockCode code_from_json(Json const& j);
  [[nodiscard]] Json      to_json(BlockCode const& code);

  [[nodiscard]] Json to_json(Alphabet const& alphabet, Word const& word);
  [[nodiscard]] Json to_json(ShiftReport const& report);
  [[nodiscard]] Json to_json(AlgebraReport const& report, Alphabet const& alphabet);
  [[nodiscard]] Json to_json(PsiResult const& result, Alphabet const& alphabet);
  [[nodiscard]] Json to_json(ToyodaResult const& result, Alphabet const& alphabet);
  [[nodiscard]] Json to_json(RightStructure const& structure, Alphabet const& alphabet);
  [[nodiscard]] Json to_json(ScCheck const& check, Alphabet const& alphabet);
  [[nodiscard]] Json to_json(CaFlags const& flags);
  [[nodiscard]] Json to_json(ScalingCheck const& check, Alphabet const& alphabet);
  [[nodiscard]] Json to_json(ConjugacyCheck const& check, Alphabet const& alphabet);
  [[nodiscard]] Json to_json(DecompositionCertificate const& cert,
                             Alphabet const&                 alphabet);
  [[nodiscard]] Json to_json(InvarianceReport const& report, Alphabet const& alphabet);
  [[nodiscard]] Json to_json(CesaroReport const& report, Alphabet const& alphabet);
  [[nodiscard]] Json to_json(Comparison const& comparison);

  // Columns: word, n, value, cesaro, half_width.
  [[nodiscard]] std::string cesaro_csv(CesaroReport const& report,
                                       Alphabet const&     alphabet);

}  // namespace tmca::json_io
