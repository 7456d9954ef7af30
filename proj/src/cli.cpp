#include "tmca/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tmca/error.hpp"
#include "tmca/fixtures.hpp"
#include "tmca/json_io.hpp"

namespace tmca {

  namespace {

    using json_io::Json;
    namespace fs = std::filesystem;

    struct UsageError : std::runtime_error {
      using std::runtime_error::runtime_error;
    };

    struct Options {
      std::string              op, fixture, shift, measure, ca, ca_b, code;
      std::vector<std::string> words;
      std::vector<std::string> edges;
      std::size_t              k         = 0;
      std::size_t              steps     = 0;
      std::size_t              depth     = 0;
      std::size_t              samples   = 100'000;
      std::uint64_t            seed      = 1;
      unsigned                 threads   = 0;
      double                   tol       = 0.02;
      std::string              mode;
      bool                     strict       = false;
      bool                     strict_exact = false;
      bool                     summary      = false;
      std::string              out_path, csv_path;
      std::size_t              max_window = 2;
      std::size_t              gamma_m    = 0;
    };

    std::string one_line(std::string s) {
      std::replace(s.begin(), s.end(), '\n', ' ');
      return s;
    }

    class Driver {
     public:
      Driver(Options const& o, std::ostream& out) : _o(o), _out(out) {}

      ////////////////////////////////////////////////////////////////////
      // Input resolution
      ////////////////////////////////////////////////////////////////////

      [[nodiscard]] bool has_table() const {
        return !_o.op.empty() || !_o.fixture.empty();
      }

      CayleyTable table() const {
        if (!_o.fixture.empty()) {
          auto t = fixture_table(_o.fixture);
          if (!t) {
            throw UsageError("unknown fixture '" + _o.fixture + "'");
          }
          return *t;
        }
        if (_o.op.empty()) {
          throw UsageError("--op or --fixture is required");
        }
        if (auto t = fixture_table(_o.op)) {
          return *t;
        }
        return json_io::table_from_json(json_io::load_file(_o.op));
      }

      MarkovShift shift(Alphabet const* full_over) const {
        if (_o.shift.empty() || _o.shift == "full") {
          if (full_over == nullptr) {
            throw UsageError("--shift is required");
          }
          return MarkovShift::full(*full_over);
        }
        return json_io::shift_from_json(json_io::load_file(_o.shift), full_over);
      }

      // Shift from --shift, taking "full" over the table's alphabet if one
      // was given.
      MarkovShift shift_only() const {
        if (has_table()) {
          auto const t = table();
          return shift(&t.alphabet());
        }
        return shift(nullptr);
      }

      CellularAutomaton ca(std::string const& file, bool strict = true) const {
        if (!file.empty()) {
          return json_io::ca_from_json(json_io::load_file(file),
                                       fs::path(file).parent_path(), strict);
        }
        if (!has_table()) {
          throw UsageError("--ca or --op/--fixture is required");
        }
        auto const t = table();
        return CellularAutomaton::from_table(shift(&t.alphabet()), t, strict);
      }

      FiniteMemoryMeasure measure(MarkovShift const& s) const {
        if (_o.measure.empty()) {
          throw UsageError("--measure is required");
        }
        if (_o.measure == "parry") {
          return parry_measure(s);
        }
        if (_o.measure == "uniform") {
          return json_io::measure_from_json(Json{{"type", "bernoulli"}}, s);
        }
        return json_io::measure_from_json(json_io::load_file(_o.measure), s);
      }

      std::vector<Word> words(MarkovShift const& s) const {
        std::vector<Word> out;
        for (auto const& w : _o.words) {
          out.push_back(s.alphabet().parse(w));
        }
        if (_o.k > 0) {
          for (auto& w : allowed_words(s, _o.k)) {
            if (std::find(out.begin(), out.end(), w) == out.end()) {
              out.push_back(std::move(w));
            }
          }
        }
        if (out.empty()) {
          throw UsageError("--word or --k is required");
        }
        return out;
      }

      StructureMode structure_mode() const {
        if (_o.mode.empty() || _o.mode == "psi") {
          return StructureMode::psi_associative;
        }
        if (_o.mode == "n_scaling" || _o.mode == "nscaling") {
          return StructureMode::n_scaling;
        }
        throw UsageError("--mode must be psi or n_scaling");
      }

      void emit(Json const& j) const {
        auto const text = j.dump(2) + "\n";
        if (_o.out_path.empty()) {
          _out << text;
          return;
        }
        std::ofstream f(_o.out_path);
        if (!f) {
          throw Error(ErrorCode::invalid_argument, "cannot write '" + _o.out_path + "'");
        }
        f << text;
      }

      int negative(bool failed) const {
        return failed && _o.strict ? exit_negative : exit_ok;
      }

      ////////////////////////////////////////////////////////////////////
      // algebra
      ////////////////////////////////////////////////////////////////////

      int algebra_classify() const {
        auto const t = table();
        auto const r = classify_table(t);
        auto const p = find_psi(t);
        Json       j;
        j["size"]              = t.size();
        j["quasigroup"]        = r.quasigroup.holds;
        j["medial"]            = r.medial.holds;
        j["left_cancellable"]  = r.left_cancellable.holds;
        j["right_cancellable"] = r.right_cancellable.holds;
        j["commutative"]       = r.commutative.holds;
        j["associative"]       = r.associative.holds;
        j["psi_associative"]   = p.psi.has_value();
        j["properties"]        = json_io::to_json(r, t.alphabet());
        j["psi"]               = json_io::to_json(p, t.alphabet());
        emit(j);
        return exit_ok;
      }

      int algebra_psi() const {
        auto const t = table();
        auto const p = find_psi(t);
        emit(json_io::to_json(p, t.alphabet()));
        return negative(!p.psi);
      }

      int algebra_toyoda() const {
        auto const t = table();
        auto const r = toyoda_decompose(t);
        auto       j = json_io::to_json(r, t.alphabet());
        if (r.decomposition) {
          auto const& d       = *r.decomposition;
          std::size_t matches = 0;
          for (Symbol a = 0; a < t.size(); ++a) {
            for (Symbol b = 0; b < t.size(); ++b) {
              matches += d.group(d.group(d.eta[a], d.rho[b]), d.constant) == t(a, b);
            }
          }
          bool commute = true;
          for (Symbol a = 0; a < t.size(); ++a) {
            commute = commute && d.eta[d.rho[a]] == d.rho[d.eta[a]];
          }
          j["reconstructed_entries"] = matches;
          j["total_entries"]         = t.size() * t.size();
          j["eta_rho_commute"]       = commute;
        }
        emit(j);
        return negative(!r.decomposition);
      }

      int algebra_structure() const {
        auto const t = table();
        emit(json_io::to_json(right_structure(t, structure_mode()), t.alphabet()));
        return exit_ok;
      }

      int algebra_closure() const {
        auto const        t = table();
        std::vector<Edge> seed;
        for (auto const& e : _o.edges) {
          auto const comma = e.find(',');
          if (comma == std::string::npos) {
            throw UsageError("--edge expects a,b");
          }
          seed.emplace_back(t.alphabet().at(e.substr(0, comma)),
                            t.alphabet().at(e.substr(comma + 1)));
        }
        if (seed.empty()) {
          throw UsageError("at least one --edge is required");
        }
        emit(json_io::to_json(sc_closure(t, seed)));
        return exit_ok;
      }

      ////////////////////////////////////////////////////////////////////
      // shift
      ////////////////////////////////////////////////////////////////////

      int shift_report_cmd() const {
        auto const s = shift_only();
        auto       j = json_io::to_json(shift_report(s, _o.depth == 0 ? 8 : _o.depth));
        j["shift"]   = json_io::to_json(s);
        emit(j);
        return exit_ok;
      }

      int shift_words() const {
        auto const s = shift_only();
        if (_o.k == 0) {
          throw UsageError("--k is required");
        }
        Json list = Json::array();
        for (auto const& w : allowed_words(s, _o.k)) {
          list.push_back(s.alphabet().format(w));
        }
        Json j;
        j["k"]     = _o.k;
        j["count"] = list.size();
        j["words"] = std::move(list);
        emit(j);
        return exit_ok;
      }

      ////////////////////////////////////////////////////////////////////
      // ca
      ////////////////////////////////////////////////////////////////////

      int ca_check_sc() const {
        if (!has_table()) {
          throw UsageError("--op or --fixture is required");
        }
        auto const t = table();
        auto const s = shift(&t.alphabet());
        auto const c = check_sc(s, t);
        emit(json_io::to_json(c, t.alphabet()));
        return negative(!c.compatible);
      }

      int ca_classify() const {
        auto const a = ca(_o.ca, false);
        Json       j = json_io::to_json(a.flags());
        j["memory"]       = a.code().memory();
        j["anticipation"] = a.code().anticipation();
        if (a.table()) {
          j["sc"] = json_io::to_json(a.sc_check(), a.full_table()->alphabet());
        }
        j["shift"] = json_io::to_json(a.shift());
        emit(j);
        return negative(!a.flags().structurally_compatible);
      }

      int ca_nscaling() const {
        if (_o.steps == 0) {
          throw UsageError("--N is required");
        }
        auto const a = ca(_o.ca);
        auto const c = check_n_scaling(a, _o.steps);
        auto       j = json_io::to_json(c, a.shift().alphabet());
        j["N"]       = _o.steps;
        emit(j);
        return negative(!c.holds);
      }

      int ca_power() const {
        if (_o.steps == 0) {
          throw UsageError("--N is required");
        }
        auto const a = ca(_o.ca);
        emit(json_io::to_json(power_rule(a, _o.steps)));
        return exit_ok;
      }

      ////////////////////////////////////////////////////////////////////
      // factor
      ////////////////////////////////////////////////////////////////////

      int factor_decompose() const {
        auto const       a = ca(_o.ca);
        DecomposeOptions options;
        if (_o.steps > 0) {
          options.scaling_n = _o.steps;
        }
        options.depth                 = _o.depth == 0 ? 8 : _o.depth;
        options.allow_product_failure = !_o.strict;
        auto const cert               = decompose(a, structure_mode(), options);
        if (_o.summary) {
          _out << summary(cert, a.shift().alphabet());
          if (!_o.out_path.empty()) {
            emit(json_io::to_json(cert, a.shift().alphabet()));
          }
        } else {
          emit(json_io::to_json(cert, a.shift().alphabet()));
        }
        return negative(!cert.product_verified || !cert.conjugacy.verified);
      }

      static std::string summary(DecompositionCertificate const& c, Alphabet const& alphabet) {
        auto const&        rs = c.hmm.structure;
        std::ostringstream s;
        s << "mode: " << (c.mode == StructureMode::psi_associative ? "psi" : "n_scaling");
        if (c.scaling_n) {
          s << " (N = " << *c.scaling_n << ")";
        }
        s << "\nK: " << rs.classes.size() << " classes";
        if (c.class_identity) {
          s << ", abelian group with cyclic factors";
          for (auto f : c.class_group_factors) {
            s << ' ' << f;
          }
        }
        s << "\nB: {";
        for (std::size_t i = 0; i < rs.identity_set.size(); ++i) {
          s << (i ? "," : "") << alphabet.name(rs.identity_set[i]);
        }
        s << "}, s_B period M = " << c.period_m << "\nL = " << c.exponent_l
          << "\nproduct verified: " << (c.product_verified ? "yes" : "no")
          << "\nconjugacy: "
          << (c.conjugacy.verified ? "verified" : "failed (" + c.conjugacy.failure + ")")
          << " at depth " << c.conjugacy.depth << '\n';
        return s.str();
      }

      int factor_verify() const {
        if (_o.ca.empty() || _o.ca_b.empty() || _o.code.empty()) {
          throw UsageError("--ca, --ca-b and --code are required");
        }
        auto const a    = ca(_o.ca);
        auto const b    = ca(_o.ca_b);
        auto const code = json_io::code_from_json(json_io::load_file(_o.code));
        auto const c    = verify_conjugacy(a, b, code, _o.depth == 0 ? 8 : _o.depth);
        emit(json_io::to_json(c, a.shift().alphabet()));
        return negative(!c.verified);
      }

      int factor_search() const {
        if (_o.ca.empty() || _o.ca_b.empty()) {
          throw UsageError("--ca and --ca-b are required");
        }
        auto const a = ca(_o.ca);
        auto const b = ca(_o.ca_b);
        auto const r = search_conjugacy(a, b, _o.max_window);
        Json       j;
        j["found"] = r.has_value();
        j["code"]  = r ? json_io::to_json(*r) : Json(nullptr);
        emit(j);
        return negative(!r);
      }

      ////////////////////////////////////////////////////////////////////
      // measure
      ////////////////////////////////////////////////////////////////////

      int measure_parry() const {
        auto const s = shift_only();
        auto const m = parry_measure(s);
        auto       j = json_io::to_json(m);
        j["entropy"]       = measure_entropy(m);
        j["shift_entropy"] = std::log(spectral_radius(s));
        emit(j);
        return exit_ok;
      }

      int measure_gamma() const {
        auto const s = shift_only();
        auto const m = measure(s);
        auto const g = gamma_sequence(m, _o.gamma_m == 0 ? m.depth() + 1 : _o.gamma_m);
        Json       j;
        j["depth"] = m.depth();
        j["gamma"] = g;
        double sum = 0;
        for (auto v : g) {
          sum += v;
        }
        j["sum"] = sum;
        emit(j);
        return exit_ok;
      }

      int measure_invariance() const {
        auto const a = ca(_o.ca);
        auto const m = measure(a.shift());
        auto const r = check_invariance(m, a.code(), _o.depth == 0 ? 6 : _o.depth,
                                        _o.tol);
        emit(json_io::to_json(r, a.shift().alphabet()));
        return negative(!r.invariant);
      }

      ////////////////////////////////////////////////////////////////////
      // cesaro
      ////////////////////////////////////////////////////////////////////

      CesaroReport cesaro() const {
        if (_o.steps == 0) {
          throw UsageError("--N is required");
        }
        auto const    a = ca(_o.ca);
        auto const    m = measure(a.shift());
        auto const    w = words(a.shift());
        CesaroOptions options;
        options.strict_exact = _o.strict_exact;
        options.samples      = _o.samples;
        options.seed         = _o.seed;
        options.threads      = _o.threads;
        if (_o.mode.empty() || _o.mode == "exact") {
          return cesaro_exact(m, a, w, _o.steps, options);
        }
        if (_o.mode == "mc" || _o.mode == "monte_carlo") {
          options.mode = CesaroMode::monte_carlo;
          return cesaro_monte_carlo(m, a, w, _o.steps, options);
        }
        throw UsageError("--mode must be exact or mc");
      }

      void write_csv(CesaroReport const& r, Alphabet const& alphabet) const {
        if (_o.csv_path.empty()) {
          return;
        }
        std::ofstream f(_o.csv_path);
        if (!f) {
          throw Error(ErrorCode::invalid_argument, "cannot write '" + _o.csv_path + "'");
        }
        f << json_io::cesaro_csv(r, alphabet);
      }

      int cesaro_run() const {
        auto const r        = cesaro();
        auto const alphabet = ca(_o.ca).shift().alphabet();
        write_csv(r, alphabet);
        emit(json_io::to_json(r, alphabet));
        return negative(r.truncated);
      }

      int cesaro_compare() const {
        auto const a = ca(_o.ca);
        auto const r = cesaro();
        auto const c = compare_to_parry(r, a.shift(), _o.tol);
        write_csv(r, a.shift().alphabet());
        Json j;
        j["comparison"] = json_io::to_json(c);
        j["report"]     = json_io::to_json(r, a.shift().alphabet());
        emit(j);
        return negative(c.verdict != Verdict::converged);
      }

     private:
      Options const& _o;
      std::ostream&  _out;
    };

  }  // namespace

  int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cellular automata with algebraic local rules on Markov shifts", "tmca"};
    app.require_subcommand(1);
    Options o;
    Driver  d(o, out);

    std::function<int()> action;
    auto leaf = [&](CLI::App* group, char const* name, char const* help, int (Driver::*fn)() const) {
      auto* cmd = group->add_subcommand(name, help);
      cmd->callback([&action, &d, fn] { action = [&d, fn] { return (d.*fn)(); }; });
      cmd->add_option("--out", o.out_path, "Write the JSON report to this file");
      cmd->add_flag("--strict", o.strict, "Exit 1 on a negative analysis result");
      return cmd;
    };
    auto table_opts = [&](CLI::App* cmd) {
      cmd->add_option("--op", o.op, "Cayley table JSON file or fixture name");
      cmd->add_option("--fixture", o.fixture, "Built-in table: paper-latin-12, paper-table-8");
    };
    auto shift_opt = [&](CLI::App* cmd) {
      cmd->add_option("--shift", o.shift, "Shift JSON file or \"full\"");
    };
    auto ca_opts = [&](CLI::App* cmd) {
      table_opts(cmd);
      shift_opt(cmd);
      cmd->add_option("--ca", o.ca, "CA JSON file");
    };
    auto mode_opt = [&](CLI::App* cmd, char const* help) {
      cmd->add_option("--mode", o.mode, help);
    };

    auto* algebra = app.add_subcommand("algebra", "Cayley table analysis");
    algebra->require_subcommand(1);
    table_opts(leaf(algebra, "classify", "Cancellation, medial and Psi-associativity flags",
                    &Driver::algebra_classify));
    table_opts(leaf(algebra, "psi", "Find Psi with (a•b)•c = Psi(a•(b•c))", &Driver::algebra_psi));
    table_opts(leaf(algebra, "toyoda", "Affine decomposition of a medial quasigroup",
                    &Driver::algebra_toyoda));
    {
      auto* cmd = leaf(algebra, "structure", "Row classes and right identities",
                       &Driver::algebra_structure);
      table_opts(cmd);
      mode_opt(cmd, "psi or n_scaling");
    }
    {
      auto* cmd = leaf(algebra, "closure", "Least SC edge set containing the seed edges",
                       &Driver::algebra_closure);
      table_opts(cmd);
      cmd->add_option("--edge", o.edges, "Seed edge a,b (repeatable)");
    }

    auto* shift = app.add_subcommand("shift", "Markov shift analysis");
    shift->require_subcommand(1);
    {
      auto* cmd = leaf(shift, "report", "Irreducibility, mixing, entropy, word counts",
                       &Driver::shift_report_cmd);
      shift_opt(cmd);
      table_opts(cmd);
      cmd->add_option("--depth", o.depth, "Longest word length counted (default 8)");
    }
    {
      auto* cmd = leaf(shift, "words", "Allowed words of length k", &Driver::shift_words);
      shift_opt(cmd);
      table_opts(cmd);
      cmd->add_option("--k", o.k, "Word length");
    }

    auto* ca = app.add_subcommand("ca", "Cellular automata");
    ca->require_subcommand(1);
    {
      auto* cmd = leaf(ca, "check-sc", "Structural compatibility edge scan", &Driver::ca_check_sc);
      table_opts(cmd);
      shift_opt(cmd);
    }
    ca_opts(leaf(ca, "classify", "Permutativity and compatibility flags", &Driver::ca_classify));
    {
      auto* cmd = leaf(ca, "nscaling", "Check Phi^N(x)_0 = x_0 • x_N", &Driver::ca_nscaling);
      ca_opts(cmd);
      cmd->add_option("--N", o.steps, "Iterate")->required();
    }
    {
      auto* cmd = leaf(ca, "power", "Local rule of the N-th iterate", &Driver::ca_power);
      ca_opts(cmd);
      cmd->add_option("--N", o.steps, "Iterate")->required();
    }

    auto* factor = app.add_subcommand("factor", "Decomposition and conjugacy");
    factor->require_subcommand(1);
    {
      auto* cmd = leaf(factor, "decompose", "Class factor times translation",
                       &Driver::factor_decompose);
      ca_opts(cmd);
      mode_opt(cmd, "psi or n_scaling");
      cmd->add_option("--N", o.steps, "Scaling exponent to test (n_scaling mode)");
      cmd->add_option("--depth", o.depth, "Conjugacy verification depth (default 8)");
      cmd->add_flag("--summary", o.summary, "Print a readable summary instead of JSON");
    }
    {
      auto* cmd = leaf(factor, "verify", "Check a conjugacy code", &Driver::factor_verify);
      cmd->add_option("--ca", o.ca, "Source CA JSON file");
      cmd->add_option("--ca-b", o.ca_b, "Target CA JSON file");
      cmd->add_option("--code", o.code, "Block code JSON file");
      cmd->add_option("--depth", o.depth, "Verification depth (default 8)");
    }
    {
      auto* cmd = leaf(factor, "search", "Search for a conjugacy", &Driver::factor_search);
      cmd->add_option("--ca", o.ca, "Source CA JSON file");
      cmd->add_option("--ca-b", o.ca_b, "Target CA JSON file");
      cmd->add_option("--max-window", o.max_window, "Largest window tried (default 2)");
    }

    auto* measure = app.add_subcommand("measure", "Finite-memory measures");
    measure->require_subcommand(1);
    {
      auto* cmd = leaf(measure, "parry", "Parry measure of an irreducible shift",
                       &Driver::measure_parry);
      shift_opt(cmd);
      table_opts(cmd);
    }
    {
      auto* cmd = leaf(measure, "gamma", "Oscillation sequence gamma_1..gamma_m",
                       &Driver::measure_gamma);
      shift_opt(cmd);
      table_opts(cmd);
      cmd->add_option("--measure", o.measure, "Measure JSON file, parry or uniform");
      cmd->add_option("--m", o.gamma_m, "Number of terms (default depth + 1)");
    }
    {
      auto* cmd = leaf(measure, "invariance", "Compare mu o Phi^-1 with mu on cylinders",
                       &Driver::measure_invariance);
      ca_opts(cmd);
      cmd->add_option("--measure", o.measure, "Measure JSON file, parry or uniform");
      cmd->add_option("--depth", o.depth, "Longest cylinder (default 6)");
      cmd->add_option("--tol", o.tol, "Tolerance (default 1e-12)");
    }

    auto* cesaro = app.add_subcommand("cesaro", "Cesàro means of mu o Phi^-n");
    cesaro->require_subcommand(1);
    for (auto [name, help, fn] :
         {std::tuple{"run", "Per-step values and running means", &Driver::cesaro_run},
          std::tuple{"compare", "Verdict against the Parry measure", &Driver::cesaro_compare}}) {
      auto* cmd = leaf(cesaro, name, help, fn);
      ca_opts(cmd);
      cmd->add_option("--measure", o.measure, "Measure JSON file, parry or uniform");
      cmd->add_option("--word", o.words, "Target cylinder (repeatable)");
      cmd->add_option("--k", o.k, "Add every allowed word of this length");
      cmd->add_option("--N", o.steps, "Number of steps")->required();
      mode_opt(cmd, "exact or mc");
      cmd->add_option("--samples", o.samples, "Monte Carlo samples (default 100000)");
      cmd->add_option("--seed", o.seed, "Monte Carlo seed (default 1)");
      cmd->add_option("--threads", o.threads, "Worker threads (default: all cores)");
      cmd->add_flag("--strict-exact", o.strict_exact, "Truncate instead of sampling");
      cmd->add_option("--csv", o.csv_path, "Also write the series as CSV");
      cmd->add_option("--tol", o.tol, "Convergence tolerance (default 0.02)");
    }

    try {
      std::reverse(args.begin(), args.end());
      app.parse(args);
    } catch (CLI::CallForHelp const&) {
      out << app.help();
      return exit_ok;
    } catch (CLI::CallForAllHelp const&) {
      out << app.help("", CLI::AppFormatMode::All);
      return exit_ok;
    } catch (CLI::ParseError const& e) {
      err << "error code=usage message=" << one_line(e.what()) << '\n';
      return exit_usage;
    }
    if (measure->parsed() && measure->get_subcommand("invariance")->parsed()
        && measure->get_subcommand("invariance")->count("--tol") == 0) {
      o.tol = 1e-12;
    }
    try {
      return action();
    } catch (UsageError const& e) {
      err << "error code=usage message=" << one_line(e.what()) << '\n';
      return exit_usage;
    } catch (Error const& e) {
      err << "error code=" << to_string(e.code()) << " message=" << one_line(e.what()) << '\n';
      return exit_error;
    } catch (std::exception const& e) {
      err << "error code=INTERNAL message=" << one_line(e.what()) << '\n';
      return exit_error;
    }
  }

}  // namespace tmca
