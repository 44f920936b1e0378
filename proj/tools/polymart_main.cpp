#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polymart/checks.hpp"
#include "polymart/errors.hpp"
#include "polymart/martingale.hpp"
#include "polymart/model_parser.hpp"
#include "polymart/moment_model.hpp"
#include "polymart/orthopoly.hpp"
#include "polymart/simkit.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace polymart;

namespace {

struct Triple {
    Rational s, t, u;
};

// Everything needed to reproduce a run; embedded verbatim in summary.json.
struct RunConfig {
    std::string command;
    std::string model;      // builtin spec, empty when a file is used
    std::string model_file; // path to a moment model file
    int order = 6;          // -N
    std::vector<std::string> triples_raw;
    std::vector<Triple> triples;
    std::vector<std::string> checks; // resolved selection, dependency order
    std::size_t paths = 100000;
    std::uint64_t seed = 42;
    double z_max = 4.0;
    std::string time = "1";  // marginal system time (ortho)
    int size = 3;            // orthogonal system size K (ortho)
    std::string from;        // transitional source time (ortho, optional)
    std::string state;       // transitional source state (ortho, optional)
    std::string out;         // report directory, empty = stdout only
    std::string format = "table";

    ordered_json to_json() const {
        ordered_json j;
        j["command"] = command;
        j["model"] = model;
        j["model_file"] = model_file;
        j["N"] = order;
        j["triples"] = triples_raw;
        j["checks"] = checks;
        j["paths"] = paths;
        j["seed"] = seed;
        j["zmax"] = z_max;
        j["time"] = time;
        j["size"] = size;
        j["from"] = from;
        j["state"] = state;
        j["out"] = out;
        j["format"] = format;
        return j;
    }
};

struct Row {
    std::string name;
    Verdict verdict;
    std::string detail;
    std::string file; // relative name of the written report, may be empty
};

int exit_from_rows(const std::vector<Row>& rows) {
    bool any_fail = false;
    bool any_degenerate = false;
    for (const auto& r : rows) {
        any_fail = any_fail || r.verdict == Verdict::fail;
        any_degenerate = any_degenerate || r.verdict == Verdict::degenerate;
    }
    if (any_fail) return 1;
    if (any_degenerate) return 2;
    return 0;
}

// Collects rows and report files for one run and renders the summary.
class Bundle {
public:
    explicit Bundle(const RunConfig& cfg) : cfg_(cfg) {
        if (!cfg.out.empty()) {
            dir_ = cfg.out;
            fs::create_directories(dir_);
        }
    }

    void write_text(const std::string& name, const std::string& text) {
        if (dir_.empty()) return;
        std::ofstream f(dir_ / name);
        f << text << '\n';
    }

    void add(Row row) { rows_.push_back(std::move(row)); }

    void add_report(const std::string& stem, const CheckReport& rep) {
        std::string file;
        if (!dir_.empty()) {
            file = stem + ".json";
            write_text(file, rep.to_json_string());
        }
        rows_.push_back({stem, rep.verdict, detail_of(rep), file});
    }

    void add_mc(const std::string& stem, const std::vector<MCTestResult>& results) {
        std::string file;
        if (!dir_.empty()) {
            file = stem + ".json";
            ordered_json arr = ordered_json::array();
            for (const auto& r : results) arr.push_back(ordered_json::parse(r.to_json_string()));
            write_text(file, arr.dump(2));
        }
        for (const auto& r : results) {
            char z[48];
            std::snprintf(z, sizeof z, "z = %.3g", r.z);
            rows_.push_back({r.stat, r.pass ? Verdict::pass : Verdict::fail,
                             r.se == 0.0 ? "exact zero" : z, file});
        }
    }

    const std::vector<Row>& rows() const { return rows_; }
    bool any_fail() const {
        return std::any_of(rows_.begin(), rows_.end(),
                           [](const Row& r) { return r.verdict == Verdict::fail; });
    }

    ordered_json summary(int code) const {
        ordered_json j;
        j["config"] = cfg_.to_json();
        j["results"] = ordered_json::array();
        for (const auto& r : rows_) {
            ordered_json row;
            row["name"] = r.name;
            row["verdict"] = std::string(verdict_name(r.verdict));
            row["detail"] = r.detail;
            row["file"] = r.file;
            j["results"].push_back(row);
        }
        if (!artifacts_.empty()) j["artifacts"] = artifacts_;
        j["exit_code"] = code;
        return j;
    }

    void add_artifact(const std::string& name) { artifacts_.push_back(name); }

    // Renders the table (or the summary JSON), writes summary.json, returns
    // the exit code.
    int finish(std::ostream& os, const std::string& stdout_json = "") {
        const int code = exit_from_rows(rows_);
        const ordered_json sum = summary(code);
        write_text("summary.json", sum.dump(2));
        if (cfg_.format == "json") {
            os << (stdout_json.empty() ? sum.dump(2) : stdout_json) << '\n';
            return code;
        }
        print_table(os);
        if (!dir_.empty()) os << "reports written to " << dir_.string() << '\n';
        return code;
    }

private:
    RunConfig cfg_;
    fs::path dir_;
    std::vector<Row> rows_;
    std::vector<std::string> artifacts_;

    static std::string detail_of(const CheckReport& rep) {
        if (!rep.notes.empty()) return rep.notes.front();
        std::ostringstream os;
        os << rep.constants.size() << " constants, " << rep.residuals.size() << " residuals";
        return os.str();
    }

    void print_table(std::ostream& os) const {
        std::size_t width = 12;
        for (const auto& r : rows_) width = std::max(width, r.name.size());
        width = std::min<std::size_t>(width, 56);
        os << pad("check", width) << "  " << pad("verdict", 14) << "  detail\n";
        os << std::string(width, '-') << "  " << std::string(14, '-') << "  "
           << std::string(32, '-') << '\n';
        int pass = 0, fail = 0, degenerate = 0, skipped = 0;
        for (const auto& r : rows_) {
            os << pad(r.name, width) << "  " << pad(std::string(verdict_name(r.verdict)), 14)
               << "  " << r.detail << '\n';
            switch (r.verdict) {
            case Verdict::pass: ++pass; break;
            case Verdict::fail: ++fail; break;
            case Verdict::degenerate: ++degenerate; break;
            case Verdict::not_applicable: ++skipped; break;
            }
        }
        os << pass << " pass, " << fail << " fail, " << degenerate << " degenerate, " << skipped
           << " not applicable\n";
    }

    static std::string pad(std::string s, std::size_t w) {
        if (s.size() > w) return s.substr(0, w - 3) + "...";
        s.resize(w, ' ');
        return s;
    }
};

// Checker failures that reflect properties of the inputs rather than usage
// mistakes become degenerate-verdict reports so the run can continue and the
// exit code lands in the degenerate/hypothesis-violated bucket.
template <class F>
CheckReport guarded(const std::string& name, F&& f) {
    const auto degenerate = [&](const char* what) {
        CheckReport rep;
        rep.check = name;
        rep.verdict = Verdict::degenerate;
        rep.note(what);
        return rep;
    };
    try {
        return f();
    } catch (const HypothesisViolated& e) {
        return degenerate(e.what());
    } catch (const DegenerateTriple& e) {
        return degenerate(e.what());
    } catch (const DegenerateVariance& e) {
        return degenerate(e.what());
    } catch (const DegenerateAtPoint& e) {
        return degenerate(e.what());
    } catch (const MomentInfeasible& e) {
        return degenerate(e.what());
    } catch (const NonPolynomialTime& e) {
        return degenerate(e.what());
    } catch (const InsufficientMoments& e) {
        return degenerate(e.what());
    }
}

std::string slug(const Rational& r) {
    std::string s = to_string(r);
    std::replace(s.begin(), s.end(), '/', 'd');
    return s;
}

Rational positive_rational(const std::string& text, const char* what) {
    const Rational r = parse_rational(text);
    if (r <= 0) throw InvalidParameter(std::string(what) + " must be positive, got " + text);
    return r;
}

Triple parse_triple(const std::string& text) {
    std::vector<std::string> parts;
    std::string current;
    std::istringstream is(text);
    while (std::getline(is, current, ',')) parts.push_back(current);
    if (parts.size() != 3)
        throw InvalidParameter("a triple needs exactly three times: '" + text + "'");
    Triple tr{positive_rational(parts[0], "triple time"),
              positive_rational(parts[1], "triple time"),
              positive_rational(parts[2], "triple time")};
    if (!(tr.s < tr.t && tr.t < tr.u))
        throw InvalidParameter("triple times must satisfy s < t < u: '" + text + "'");
    return tr;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidParameter("cannot read model file '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// order: the moment capacity needed by the caller.
MomentModel load_model(const RunConfig& cfg, int order) {
    if (cfg.model.empty() == cfg.model_file.empty())
        throw InvalidParameter("exactly one of --model and --model-file is required");
    if (!cfg.model.empty()) return MomentModel::from_spec(cfg.model, order);
    return parse_model(read_file(cfg.model_file));
}

CheckReport certify_report(const MartingaleFamily& fam) {
    CheckReport rep;
    rep.check = "certify";
    rep.constant("model", fam.model().name());
    rep.constant("order", std::to_string(fam.order()));
    for (int n = 0; n <= fam.order(); ++n)
        if (!fam.certified(n)) rep.residual("M_" + std::to_string(n), "uncertified");
    if (rep.residuals.empty())
        rep.note("increment and basis conditional-expectation routes agree for every member");
    else
        rep.verdict = Verdict::fail;
    return rep;
}

CheckReport certify_failure(const CertificationFailed& e) {
    CheckReport rep;
    rep.check = "certify";
    rep.verdict = Verdict::fail;
    rep.residual("M_" + std::to_string(e.order), e.residual);
    rep.note(e.what());
    return rep;
}

int run_build(const RunConfig& cfg) {
    Bundle bundle(cfg);
    const MomentModel model = load_model(cfg, cfg.order);
    std::string family_json;
    try {
        const MartingaleFamily fam = build_family(model, cfg.order);
        family_json = family_to_json(fam);
        bundle.write_text("family.json", family_json);
        bundle.add_report("certify", certify_report(fam));
        if (!cfg.out.empty()) bundle.add_artifact("family.json");
    } catch (const CertificationFailed& e) {
        bundle.add_report("certify", certify_failure(e));
    }
    return bundle.finish(std::cout, family_json);
}

const std::vector<std::pair<std::string, int>>& check_tiers() {
    // name -> dependency tier; a hard fail in one tier short-circuits all
    // later tiers under --all.
    static const std::vector<std::pair<std::string, int>> tiers = {
        {"certify", 0}, {"ii", 1},      {"levy", 2}, {"reversed", 3}, {"ortho", 3},
        {"cgs", 4},     {"harness", 5}, {"qh", 6},   {"m2-reversed", 7},
    };
    return tiers;
}

int tier_of(const std::string& name) {
    for (const auto& [n, tier] : check_tiers())
        if (n == name) return tier;
    throw InvalidParameter("unknown check '" + name + "'");
}

CheckReport skipped_report(const std::string& name, const std::string& blocker) {
    CheckReport rep;
    rep.check = name;
    rep.verdict = Verdict::not_applicable;
    rep.note("not run: upstream check '" + blocker + "' failed");
    return rep;
}

int run_check(const RunConfig& cfg) {
    Bundle bundle(cfg);
    // Capacity 2N keeps every cross moment E M_n M_m with n, m <= N in
    // range for the orthogonality and reversed-martingale checks.
    const MomentModel model = load_model(cfg, 2 * cfg.order);

    std::optional<MartingaleFamily> fam;
    std::optional<CheckReport> build_failure;
    const auto family = [&]() -> const MartingaleFamily& {
        if (!fam) fam.emplace(build_family(model, cfg.order));
        return *fam;
    };

    const bool all = cfg.checks.size() == check_tiers().size();
    int failed_tier = -1;
    std::string blocker;
    for (const auto& name : cfg.checks) {
        const int tier = tier_of(name);
        if (all && failed_tier >= 0 && tier > failed_tier) {
            bundle.add_report(name, skipped_report(name, blocker));
            continue;
        }
        CheckReport rep;
        if (build_failure && name != "levy") {
            rep = *build_failure;
            rep.check = name;
        } else {
            try {
                if (name == "certify")
                    rep = certify_report(family());
                else if (name == "ii")
                    rep = guarded(name, [&] { return check_independent_increments(family()); });
                else if (name == "levy")
                    rep = guarded(name, [&] { return levy_check(model, cfg.order); });
                else if (name == "reversed")
                    rep = guarded(name, [&] { return check_reversed_martingale(family()); });
                else if (name == "ortho")
                    rep = guarded(name, [&] { return check_orthogonality(family()); });
                else if (name == "cgs")
                    rep = guarded(name, [&] { return check_gram_schmidt(family()); });
                else if (name == "harness")
                    rep = guarded(name, [&] { return check_harness(family()); });
                else if (name == "qh")
                    rep = guarded(name, [&] { return qh_solve(family()); });
                else if (name == "m2-reversed")
                    rep = guarded(name, [&] { return check_m2_reversed(family()); });
                else
                    throw InvalidParameter("unknown check '" + name + "'");
            } catch (const CertificationFailed& e) {
                // The family itself is defective; every family-based check
                // inherits the failure.
                build_failure = certify_failure(e);
                rep = *build_failure;
                rep.check = name;
            }
        }
        bundle.add_report(name, rep);
        if (rep.verdict == Verdict::fail && (failed_tier < 0 || tier < failed_tier)) {
            failed_tier = tier;
            blocker = name;
        }

        if (name == "qh" && rep.verdict != Verdict::not_applicable) {
            for (const auto& tr : cfg.triples) {
                const std::string stem =
                    "qh_" + slug(tr.s) + "_" + slug(tr.t) + "_" + slug(tr.u);
                CheckReport concrete = guarded(stem, [&] {
                    return qh_solve(family(), tr.s, tr.t, tr.u);
                });
                concrete.check = stem;
                bundle.add_report(stem, concrete);
                if (concrete.verdict == Verdict::fail && failed_tier < 0) {
                    failed_tier = tier;
                    blocker = stem;
                }
            }
        }
    }
    return bundle.finish(std::cout);
}

int run_ortho(const RunConfig& cfg) {
    Bundle bundle(cfg);
    const Rational t = positive_rational(cfg.time, "--time");
    const int K = cfg.size;
    if (K < 0) throw InvalidParameter("--size must be nonnegative");
    const bool transitional = !cfg.from.empty() || !cfg.state.empty();
    if (transitional && (cfg.from.empty() || cfg.state.empty()))
        throw InvalidParameter("--from and --state must be given together");

    const int capacity = std::max(cfg.order, 2 * K);
    const MomentModel model = load_model(cfg, capacity);

    // On success the written file holds the system itself (module schema);
    // a degenerate construction leaves a report in its place.
    const auto emit = [&](const std::string& name, const std::optional<OrthogonalSystem>& sys,
                          const CheckReport& rep) {
        if (!sys) {
            bundle.add_report(name, rep);
            return;
        }
        std::string file;
        if (!cfg.out.empty()) {
            file = name + ".json";
            bundle.write_text(file, sys->to_json_string());
            bundle.add_artifact(file);
        }
        bundle.add({name, rep.verdict, rep.notes.empty() ? "" : rep.notes.front(), file});
    };

    std::optional<OrthogonalSystem> marginal_sys;
    const CheckReport marginal = guarded("marginal", [&] {
        marginal_sys = marginal_orthogonal(model, t, K);
        CheckReport rep;
        rep.check = "marginal";
        rep.constant("K", std::to_string(K));
        rep.constant("t", to_string(t));
        rep.note("monic orthogonal system from the marginal moments");
        return rep;
    });
    emit("marginal", marginal_sys, marginal);

    if (transitional) {
        const Rational s = positive_rational(cfg.from, "--from");
        const Rational y = parse_rational(cfg.state);
        std::optional<OrthogonalSystem> transitional_sys;
        const CheckReport rep = guarded("transitional", [&] {
            const int fam_order = std::min(std::max(cfg.order, 2 * K), model.max_order());
            const MartingaleFamily fam = build_family(model, fam_order);
            transitional_sys = transitional_orthogonal(fam, s, y, t, K);
            CheckReport r;
            r.check = "transitional";
            r.constant("K", std::to_string(K));
            r.constant("s", to_string(s));
            r.constant("y", to_string(y));
            r.constant("t", to_string(t));
            r.note("orthogonal system of the conditional law given X_s = y");
            return r;
        });
        emit("transitional", transitional_sys, rep);
    }
    return bundle.finish(std::cout);
}

int run_sim(const RunConfig& cfg) {
    Bundle bundle(cfg);
    if (cfg.model.empty())
        throw InvalidParameter("sim samples the builtin processes; use --model");
    if (cfg.paths < 2) throw InvalidParameter("--paths must be at least 2");
    const Triple tr = cfg.triples.empty() ? Triple{Rational(1), Rational(2), Rational(4)}
                                          : cfg.triples.front();
    const int N = cfg.order;
    // Second moments of M_n(t) M_K(s) reach state order 2 (n + K).
    const MomentModel model = load_model(cfg, 4 * N);
    const MartingaleFamily fam = build_family(model, N);
    const PathBatch batch =
        sample_paths(cfg.model, {tr.s, tr.t, tr.u}, cfg.paths, cfg.seed, 4);

    std::vector<MCTestResult> martingale;
    for (int n = 1; n <= N; ++n) {
        auto part = mc_martingale_test(fam, batch, n, tr.s, tr.t, N, cfg.z_max);
        martingale.insert(martingale.end(), part.begin(), part.end());
    }
    bundle.add_mc("sim_martingale", martingale);

    std::vector<MCTestResult> moments;
    for (int n = 1; n <= N; ++n)
        moments.push_back(mc_moment_check(model, batch, n, tr.u, cfg.z_max));
    bundle.add_mc("sim_moments", moments);
    return bundle.finish(std::cout);
}

int run_report(const RunConfig& cfg) {
    if (cfg.out.empty()) throw InvalidParameter("report needs --out <dir> to aggregate");
    if (!fs::is_directory(cfg.out))
        throw InvalidParameter("not a directory: '" + cfg.out + "'");
    Bundle bundle(cfg);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(cfg.out))
        if (entry.path().extension() == ".json" && entry.path().filename() != "summary.json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    const auto classify = [&](const ordered_json& j, const std::string& file) {
        if (j.contains("check") && j.contains("verdict")) {
            bundle.add({j["check"].get<std::string>(),
                        verdict_from_name(j["verdict"].get<std::string>()),
                        j.contains("notes") && !j["notes"].empty()
                            ? j["notes"].front().get<std::string>()
                            : "",
                        file});
            return;
        }
        if (j.contains("stat") && j.contains("verdict")) {
            bundle.add({j["stat"].get<std::string>(),
                        verdict_from_name(j["verdict"].get<std::string>()), "", file});
            return;
        }
        bundle.add_artifact(file);
    };

    for (const auto& path : files) {
        const ordered_json j = ordered_json::parse(read_file(path.string()));
        if (j.is_array())
            for (const auto& element : j) classify(element, path.filename().string());
        else
            classify(j, path.filename().string());
    }
    return bundle.finish(std::cout);
}

std::vector<std::string> resolve_checks(bool all, const std::string& csv,
                                        const std::vector<std::string>& flags) {
    std::vector<std::string> wanted = flags;
    std::istringstream is(csv);
    std::string item;
    while (std::getline(is, item, ','))
        if (!item.empty()) wanted.push_back(item);
    std::vector<std::string> ordered;
    for (const auto& [name, tier] : check_tiers()) {
        (void)tier;
        if (all || std::find(wanted.begin(), wanted.end(), name) != wanted.end())
            ordered.push_back(name);
    }
    for (const auto& w : wanted)
        if (std::find(ordered.begin(), ordered.end(), w) == ordered.end())
            throw InvalidParameter("unknown check '" + w + "'");
    if (ordered.empty())
        throw InvalidParameter("no checks selected; use --all, --checks or a check flag");
    return ordered;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact martingale families, structural checks and Monte Carlo validation"};
    app.require_subcommand(1);

    RunConfig cfg;
    const auto add_model_flags = [&](CLI::App* cmd) {
        cmd->add_option("--model", cfg.model, "builtin process, e.g. wiener, poisson:3/2");
        cmd->add_option("--model-file", cfg.model_file, "moment model file")
            ->check(CLI::ExistingFile);
        cmd->add_option("-N", cfg.order, "family order");
        cmd->add_option("--out", cfg.out, "directory for the JSON report bundle");
        cmd->add_option("--format", cfg.format, "stdout format")
            ->check(CLI::IsMember({"table", "json"}));
    };

    CLI::App* build = app.add_subcommand("build", "construct and certify a family");
    add_model_flags(build);

    CLI::App* check = app.add_subcommand("check", "run structural checkers");
    add_model_flags(check);
    check->add_option("--triple", cfg.triples_raw, "times s,t,u for the concrete regression");
    std::string checks_csv;
    check->add_option("--checks", checks_csv, "comma-separated checks to run");
    bool all = false;
    check->add_flag("--all", all, "run every check in dependency order");
    std::vector<std::string> check_flags;
    for (const auto& [name, tier] : check_tiers()) {
        (void)tier;
        check->add_flag_callback(
            "--" + name, [&check_flags, n = name] { check_flags.push_back(n); },
            "run the " + name + " check");
    }

    CLI::App* ortho = app.add_subcommand("ortho", "orthogonal systems from moments");
    add_model_flags(ortho);
    ortho->add_option("--time", cfg.time, "time of the marginal law");
    ortho->add_option("--size", cfg.size, "number of orthogonal polynomials K");
    ortho->add_option("--from", cfg.from, "source time s of a transitional system");
    ortho->add_option("--state", cfg.state, "source state y of a transitional system");

    CLI::App* sim = app.add_subcommand("sim", "Monte Carlo validation suite");
    add_model_flags(sim);
    sim->add_option("--triple", cfg.triples_raw, "grid times s,t,u");
    sim->add_option("--paths", cfg.paths, "number of simulated paths");
    sim->add_option("--seed", cfg.seed, "master seed");
    sim->add_option("--zmax", cfg.z_max, "z-score acceptance threshold");

    CLI::App* report = app.add_subcommand("report", "aggregate a report directory");
    report->add_option("--out", cfg.out, "directory with prior JSON reports");
    report->add_option("--format", cfg.format, "stdout format")
        ->check(CLI::IsMember({"table", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }
    // The martingale suite needs moments up to 4N, so sim defaults lower.
    if (*sim && sim->count("-N") == 0) cfg.order = 3;

    try {
        if (cfg.order < 2) throw InvalidParameter("-N must be at least 2");
        for (const auto& raw : cfg.triples_raw) cfg.triples.push_back(parse_triple(raw));
        if (*build) {
            cfg.command = "build";
            return run_build(cfg);
        }
        if (*check) {
            cfg.command = "check";
            cfg.checks = resolve_checks(all, checks_csv, check_flags);
            return run_check(cfg);
        }
        if (*ortho) {
            cfg.command = "ortho";
            return run_ortho(cfg);
        }
        if (*sim) {
            cfg.command = "sim";
            return run_sim(cfg);
        }
        cfg.command = "report";
        return run_report(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
