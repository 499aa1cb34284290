// aptk: command-line front end for the exponential-sum toolkit.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aptk/aptk.hpp"

namespace {

using aptk::Json;

constexpr std::uint64_t kDefaultSeed = 20240917;

enum Exit { kOk = 0, kNegative = 1, kUsage = 2, kBudget = 3 };

struct Output {
  std::string out;
  std::string csv;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("APTK_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw aptk::Error(aptk::ErrorCode::InvalidArgument, "APTK_SEED is not an unsigned integer");
  }
  return kDefaultSeed;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw aptk::Error(aptk::ErrorCode::InvalidArgument, "bad number '" + item + "' in list");
    }
  }
  return out;
}

void emit(const Output& o, const std::string& command, const std::vector<std::string>& inputs, Json result,
          const std::optional<aptk::CsvTable>& csv = std::nullopt) {
  Json report;
  report["command"] = command;
  report["inputs"] = inputs;
  report["result"] = std::move(result);
  const std::string text = report.dump(2) + "\n";
  if (o.out.empty())
    std::cout << text;
  else
    aptk::write_atomic(o.out, text);
  if (!o.csv.empty()) {
    if (!csv) throw aptk::Error(aptk::ErrorCode::InvalidArgument, "command '" + command + "' has no CSV trace");
    aptk::write_atomic(o.csv, csv->str());
  }
}

aptk::CsvTable deviation_trace(const aptk::DeviationFunction& dev, double lo, double hi, std::size_t points) {
  aptk::CsvTable t({"tau", "deviation"});
  if (!(hi > lo)) {
    t.add_row(std::vector<double>{lo, dev(lo)});
    return t;
  }
  for (std::size_t i = 0; i < points; ++i) {
    const double tau = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    t.add_row(std::vector<double>{tau, dev(tau)});
  }
  return t;
}

aptk::EquivalenceOptions equiv_options(const std::string& mode, double eps, long max_denom, const std::string& basis) {
  aptk::EquivalenceOptions o;
  if (mode == "exact")
    o.mode = aptk::DecisionMode::Exact;
  else if (mode == "tol")
    o.mode = aptk::DecisionMode::Tolerance;
  else
    throw aptk::Error(aptk::ErrorCode::InvalidArgument, "unknown mode '" + mode + "'");
  o.eps_phase = eps;
  o.max_denominator = max_denom;
  o.basis = basis == "integral" ? aptk::BasisChoice::Integral : aptk::BasisChoice::Natural;
  return o;
}

aptk::SearchStrategy parse_strategy(const std::string& s) {
  if (s == "scan") return aptk::SearchStrategy::ScanRefine;
  if (s == "scan-only") return aptk::SearchStrategy::Scan;
  if (s == "lattice") return aptk::SearchStrategy::Lattice;
  throw aptk::Error(aptk::ErrorCode::InvalidArgument, "unknown strategy '" + s + "'");
}

std::vector<double> load_taus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw aptk::Error(aptk::ErrorCode::SchemaError, "cannot read " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error&) {
    throw aptk::Error(aptk::ErrorCode::SchemaError, path + ": malformed JSON");
  }
  const Json* arr = &doc;
  if (doc.is_object()) {
    if (doc.contains("result") && doc["result"].is_object() && doc["result"].contains("taus"))
      arr = &doc["result"]["taus"];
    else if (doc.contains("taus"))
      arr = &doc["taus"];
  }
  if (!arr->is_array()) throw aptk::Error(aptk::ErrorCode::SchemaError, path + ": expected a list of taus");
  std::vector<double> out;
  for (const auto& v : *arr) {
    if (!v.is_number()) throw aptk::Error(aptk::ErrorCode::SchemaError, path + ": taus must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

// Reject sums whose atom tables differ.
void same_atoms(const aptk::SumDocument& a, const aptk::SumDocument& b) {
  if (a.atoms.names != b.atoms.names)
    throw aptk::Error(aptk::ErrorCode::SpectrumMismatch, "documents declare different atoms");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bohr equivalence and Besicovitch analysis for exponential sums"};
  app.require_subcommand(1);
  Output o;
  app.add_option("--out", o.out, "write the JSON report here instead of stdout");
  app.add_option("--csv", o.csv, "write a CSV trace here");

  std::vector<std::string> files;
  auto add = [&](const char* name, const char* help, std::size_t min_files, std::size_t max_files) {
    auto* sub = app.add_subcommand(name, help);
    auto* opt = sub->add_option("files", files, "sum documents")->required()->check(CLI::ExistingFile);
    opt->expected(static_cast<int>(min_files), static_cast<int>(max_files));
    sub->add_option("--out", o.out, "write the JSON report here instead of stdout");
    sub->add_option("--csv", o.csv, "write a CSV trace here");
    return sub;
  };

  auto* basis = add("basis", "natural basis of the spectrum", 1, 1);
  auto* integralize = add("integralize", "integral basis of the spectrum", 1, 1);

  std::string mode = "exact", basis_choice = "natural";
  double eps_phase = 1e-9;
  long max_denom = 1'000'000;
  auto* equiv = add("equiv", "decide Bohr equivalence", 2, 2);
  equiv->add_option("--mode", mode)->check(CLI::IsMember({"exact", "tol"}));
  equiv->add_option("--eps-phase", eps_phase)->check(CLI::PositiveNumber);
  equiv->add_option("--max-denom", max_denom)->check(CLI::PositiveNumber);
  equiv->add_option("--basis", basis_choice)->check(CLI::IsMember({"natural", "integral"}));

  auto* witness = add("witness", "witness in natural form", 2, 2);

  std::optional<std::uint64_t> seed;
  auto* sample = add("sample", "random equivalent sum", 1, 1);
  sample->add_option("--seed", seed);

  double tau = 0.0;
  auto* translate = add("translate", "translate a sum by tau", 1, 1);
  translate->add_option("--tau", tau)->required();

  auto* b2dist = add("b2dist", "exact B^2 distance", 2, 2);

  std::string schedule = "100,1000,10000", lambda;
  auto* mean = add("mean", "mean value estimate", 1, 1);
  mean->add_option("--schedule", schedule);
  mean->add_option("--lambda", lambda, "frequency coordinates, comma separated (default 0)");

  std::string orders;
  auto* fejer = add("fejer", "Bochner-Fejer approximant", 1, 1);
  fejer->add_option("--orders", orders)->required();

  double d = 0.0, eps = 1e-3;
  std::size_t budget = 100'000'000;
  std::string strategy = "scan";
  auto* find_tau = add("find-tau", "translation number between equivalent sums", 2, 2);
  find_tau->add_option("--d", d);
  find_tau->add_option("--eps", eps)->required();
  find_tau->add_option("--budget", budget);
  find_tau->add_option("--strategy", strategy)->check(CLI::IsMember({"scan", "scan-only", "lattice"}));

  std::string range;
  auto* enumerate = add("enumerate-taus", "all local minima of the deviation below eps", 2, 2);
  enumerate->add_option("--eps", eps)->required();
  enumerate->add_option("--range", range)->required();
  enumerate->add_option("--budget", budget);

  std::size_t nmax = 1;
  auto* dense = add("dense-translates", "translates converging in B^2", 2, 2);
  dense->add_option("--nmax", nmax)->required();
  dense->add_option("--budget", budget);
  dense->add_option("--strategy", strategy)->check(CLI::IsMember({"scan", "scan-only", "lattice"}));

  double l = 0.0;
  auto* uniform = add("uniform-check", "window count ratio of a tau list", 1, 1);
  uniform->add_option("--l", l)->required();

  double tol = 0.1;
  std::size_t samples = 0;
  auto* compact = add("compact-extract", "B^2-convergent subsequence of equivalent sums", 1, 1 << 20);
  compact->add_option("--tol", tol)->required();
  compact->add_option("--samples", samples, "draw this many samples equivalent to a single input");
  compact->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  try {
    if (sub == basis || sub == integralize) {
      const auto doc = aptk::load_sum(files[0]);
      auto b = aptk::natural_basis(doc.sum.spectrum);
      if (sub == integralize) b = aptk::integralize(b);
      emit(o, cmd, files, aptk::to_json(b));
      return kOk;
    }
    if (sub == equiv) {
      const auto a = aptk::load_sum(files[0]), b = aptk::load_sum(files[1]);
      same_atoms(a, b);
      const auto v = aptk::decide_equivalence(a.sum, b.sum, equiv_options(mode, eps_phase, max_denom, basis_choice));
      emit(o, cmd, files, aptk::to_json(v));
      return v.equivalent() ? kOk : kNegative;
    }
    if (sub == witness) {
      const auto a = aptk::load_sum(files[0]), b = aptk::load_sum(files[1]);
      same_atoms(a, b);
      const auto w = aptk::witness_natural_form(a.sum, b.sum);
      Json r;
      r["x0_turns"] = aptk::to_json(w.x0.x);
      Json shifts = Json::array();
      for (const auto& p : w.shifts) shifts.push_back(aptk::to_json(p));
      r["shifts"] = shifts;
      r["verified"] = aptk::check_natural_form(a.sum, b.sum, w);
      r["basis"] = aptk::to_json(w.basis);
      emit(o, cmd, files, r);
      return kOk;
    }
    if (sub == sample) {
      const auto a = aptk::load_sum(files[0]);
      const auto s = resolve_seed(seed);
      const auto smp = aptk::sample_equivalent_with_witness(a.sum, s);
      Json r;
      r["seed"] = s;
      r["x_turns"] = aptk::to_json(smp.x);
      r["basis"] = aptk::to_json(smp.basis);
      r["sum"] = aptk::sum_to_json(smp.sum, a.atoms);
      emit(o, cmd, files, r);
      return kOk;
    }
    if (sub == translate) {
      const auto a = aptk::load_sum(files[0]);
      Json r;
      r["tau"] = tau;
      r["sum"] = aptk::sum_to_json(aptk::translate(a.sum, tau, a.atoms), a.atoms);
      emit(o, cmd, files, r);
      return kOk;
    }
    if (sub == b2dist) {
      const auto a = aptk::load_sum(files[0]), b = aptk::load_sum(files[1]);
      same_atoms(a, b);
      const auto dist = aptk::b2_distance_exact(a.sum, b.sum);
      Json r;
      r["distance"] = dist.value;
      r["upper_bound"] = dist.upper_bound;
      emit(o, cmd, files, r);
      return kOk;
    }
    if (sub == mean) {
      const auto a = aptk::load_sum(files[0]);
      std::vector<aptk::Rational> coords(a.atoms.size());
      if (!lambda.empty()) {
        std::stringstream ss(lambda);
        std::string item;
        std::size_t k = 0;
        while (std::getline(ss, item, ',')) {
          if (k >= coords.size()) throw aptk::Error(aptk::ErrorCode::InvalidArgument, "--lambda has too many coordinates");
          coords[k++] = aptk::parse_rational(item);
        }
        if (k != coords.size()) throw aptk::Error(aptk::ErrorCode::InvalidArgument, "--lambda has too few coordinates");
      }
      const aptk::Frequency lam(coords);
      const auto est = aptk::mean_value_estimate(a.sum, lam, a.atoms, parse_list(schedule));
      const auto exact = aptk::fourier_coefficient(a.sum, lam);
      Json r = aptk::to_json(est);
      r["lambda"] = aptk::to_json(lam);
      r["exact_re"] = exact.real();
      r["exact_im"] = exact.imag();
      aptk::CsvTable t({"half_length", "re", "im", "abs_error"});
      for (std::size_t i = 0; i < est.half_lengths.size(); ++i)
        t.add_row(std::vector<double>{est.half_lengths[i], est.estimates[i].real(), est.estimates[i].imag(),
                                      std::abs(est.estimates[i] - exact)});
      emit(o, cmd, files, r, t);
      return kOk;
    }
    if (sub == fejer) {
      const auto a = aptk::load_sum(files[0]);
      std::vector<long> ord;
      for (double v : parse_list(orders)) {
        if (v != std::floor(v)) throw aptk::Error(aptk::ErrorCode::InvalidArgument, "orders must be integers");
        ord.push_back(static_cast<long>(v));
      }
      const auto b = aptk::integralize(aptk::natural_basis(a.sum.spectrum));
      const auto scheme = aptk::fejer_factors(b, ord);
      Json r = aptk::to_json(scheme);
      r["approximation_error"] = aptk::approximation_error(a.sum, scheme);
      r["sum"] = aptk::sum_to_json(aptk::approximant(a.sum, scheme), a.atoms);
      emit(o, cmd, files, r);
      return kOk;
    }
    if (sub == find_tau) {
      const auto a = aptk::load_sum(files[0]), b = aptk::load_sum(files[1]);
      same_atoms(a, b);
      aptk::SearchOptions so;
      so.budget = budget;
      so.strategy = parse_strategy(strategy);
      try {
        const auto c = aptk::find_tau(a.sum, b.sum, a.atoms, d, eps, so);
        const aptk::DeviationFunction dev(a.sum, b.sum, a.atoms);
        emit(o, cmd, files, aptk::to_json(c), deviation_trace(dev, d, c.tau, 1001));
        return kOk;
      } catch (const aptk::BudgetExhausted& e) {
        Json r = aptk::to_json(e.best());
        r["error"] = "BudgetExhausted";
        emit(o, cmd, files, r, aptk::CsvTable({"tau", "deviation"}));
        std::cerr << e.what() << "\n";
        return kBudget;
      }
    }
    if (sub == enumerate) {
      const auto a = aptk::load_sum(files[0]), b = aptk::load_sum(files[1]);
      same_atoms(a, b);
      const auto rg = parse_list(range);
      if (rg.size() != 2) throw aptk::Error(aptk::ErrorCode::InvalidArgument, "--range expects T0,T1");
      const auto e = aptk::enumerate_taus(a.sum, b.sum, a.atoms, eps, rg[0], rg[1], 100000, budget);
      Json r;
      r["taus"] = e.taus;
      r["deviations"] = e.deviations;
      r["density"] = aptk::to_json(e.density);
      r["scanned"] = e.scanned;
      r["qualifying_samples"] = e.qualifying_samples;
      r["evaluations"] = e.evaluations;
      r["scan_step"] = e.scan_step;
      aptk::CsvTable t({"tau", "deviation"});
      for (std::size_t i = 0; i < e.taus.size(); ++i) t.add_row(std::vector<double>{e.taus[i], e.deviations[i]});
      emit(o, cmd, files, r, t);
      return kOk;
    }
    if (sub == dense) {
      const auto f = aptk::load_sum(files[0]), h = aptk::load_sum(files[1]);
      same_atoms(f, h);
      aptk::SearchOptions so;
      so.budget = budget;
      so.strategy = parse_strategy(strategy);
      const auto run = aptk::dense_translate_sequence(f.sum, h.sum, f.atoms, nmax, so);
      Json r;
      r["success"] = run.success;
      r["taus"] = run.taus;
      r["measured"] = run.measured;
      r["bounds"] = run.bounds;
      r["eps"] = run.eps_sequence;
      Json certs = Json::array();
      for (const auto& c : run.certificates) certs.push_back(aptk::to_json(c));
      r["certificates"] = certs;
      aptk::CsvTable t({"n", "tau", "measured", "bound"});
      for (std::size_t i = 0; i < run.taus.size(); ++i)
        t.add_row(std::vector<double>{static_cast<double>(i + 1), run.taus[i], run.measured[i], run.bounds[i]});
      emit(o, cmd, files, r, t);
      return run.success ? kOk : kNegative;
    }
    if (sub == uniform) {
      const auto taus = load_taus(files[0]);
      const auto rep = aptk::uniformity_report(taus, l);
      Json r;
      r["l"] = l;
      r["ratio"] = std::isfinite(rep.ratio) ? Json(rep.ratio) : Json("inf");
      r["max_count"] = rep.max_count;
      r["min_count"] = rep.min_count;
      r["windows"] = rep.windows;
      r["uniform"] = rep.ratio < 2.0;
      emit(o, cmd, files, r);
      return rep.ratio < 2.0 ? kOk : kNegative;
    }
    if (sub == compact) {
      std::vector<aptk::ExponentialSum> fs;
      aptk::AtomTable atoms;
      Json r;
      if (samples > 0) {
        if (files.size() != 1)
          throw aptk::Error(aptk::ErrorCode::InvalidArgument, "--samples takes exactly one input document");
        const auto a = aptk::load_sum(files[0]);
        atoms = a.atoms;
        const auto s = resolve_seed(seed);
        r["seed"] = s;
        for (std::size_t i = 0; i < samples; ++i) fs.push_back(aptk::sample_equivalent(a.sum, s + i));
      } else {
        for (const auto& path : files) {
          auto doc = aptk::load_sum(path);
          if (!fs.empty() && doc.atoms.names != atoms.names)
            throw aptk::Error(aptk::ErrorCode::SpectrumMismatch, "documents declare different atoms");
          atoms = doc.atoms;
          fs.push_back(std::move(doc.sum));
        }
      }
      const auto ex = aptk::extract_convergent_subsequence(fs, tol);
      r["indices"] = ex.indices;
      r["successive_distances"] = ex.successive_distances;
      r["refinements"] = ex.refinements;
      r["limit"] = aptk::sum_to_json(ex.limit, atoms);
      emit(o, cmd, files, r);
      return kOk;
    }
  } catch (const aptk::Error& e) {
    std::cerr << "aptk " << cmd << ": " << e.what() << "\n";
    switch (e.code()) {
      case aptk::ErrorCode::NotEquivalentInput:
      case aptk::ErrorCode::NotEquivalentFamily:
        return kNegative;
      case aptk::ErrorCode::BudgetExhausted:
        return kBudget;
      default:
        return kUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << "aptk " << cmd << ": " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
