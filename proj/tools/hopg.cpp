#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hopg/dot.hpp"
#include "hopg/json_io.hpp"
#include "hopg/matcher.hpp"
#include "hopg/oracle.hpp"
#include "hopg/proofnets.hpp"
#include "hopg/rewrite.hpp"
#include "hopg/server.hpp"
#include "hopg/session.hpp"

namespace fs = std::filesystem;
using hopg::json_io::json;
namespace jio = hopg::json_io;

namespace {

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::shared_ptr<const hopg::PSignature> load_signature(const std::string& path) {
    if (path.empty())
        return nullptr;
    return std::make_shared<const hopg::PSignature>(jio::signature_from_json(jio::read_file(path)));
}

hopg::PortGraph load_graph(const std::string& path, std::shared_ptr<const hopg::PSignature> sig) {
    return jio::graph_from_json(jio::read_file(path), std::move(sig));
}

// A file holds one rule object or an array of them; a directory contributes
// its *.json files in name order.
void load_rules(const std::string& path, const std::shared_ptr<const hopg::PSignature>& sig,
                std::vector<hopg::Rule>& out) {
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_regular_file() && e.path().extension() == ".json")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            load_rules(f.string(), sig, out);
        return;
    }
    const auto j = jio::read_file(path);
    if (j.is_array()) {
        for (const auto& r : j)
            out.push_back(jio::rule_from_json(r, sig));
    } else {
        out.push_back(jio::rule_from_json(j, sig));
    }
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_)
                throw hopg::error(hopg::errc::parse_error, "cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

json diagnostics_json(const std::vector<hopg::Diagnostic>& ds) {
    json out = json::array();
    for (const auto& d : ds)
        out.push_back({{"code", d.code},
                       {"subject", d.subject},
                       {"message", d.message},
                       {"severity", d.severity == hopg::Diagnostic::Severity::error ? "error" : "warning"}});
    return out;
}

std::string detect_kind(const json& j) {
    if (j.is_object() && j.contains("lhs"))
        return "rule";
    if (j.is_object() && j.contains("edges"))
        return "graph";
    if (j.is_object() && j.contains("nodes"))
        return "signature";
    throw hopg::error(hopg::errc::parse_error, "cannot tell whether the file holds a signature, graph or rule");
}

int cmd_validate(const std::string& file, std::string kind, const std::string& sig_path) {
    const auto j = jio::read_file(file);
    if (kind == "auto")
        kind = detect_kind(j);
    std::vector<hopg::Diagnostic> ds;
    if (kind == "signature") {
        ds = hopg::validate(jio::signature_from_json(j, false));
    } else if (kind == "graph") {
        ds = hopg::validate(jio::graph_from_json(j, load_signature(sig_path)));
    } else {
        jio::rule_from_json(j, load_signature(sig_path));
    }
    if (hopg::has_errors(ds)) {
        const auto first = std::find_if(ds.begin(), ds.end(), [](const hopg::Diagnostic& d) {
            return d.severity == hopg::Diagnostic::Severity::error;
        });
        std::cout << jio::dump({{"error", first->code}, {"message", first->message}, {"diagnostics", diagnostics_json(ds)}});
        return 1;
    }
    std::cout << jio::dump({{"kind", kind}, {"valid", true}, {"diagnostics", diagnostics_json(ds)}});
    return 0;
}

int cmd_match(std::string pattern_path, std::string subject_path, const std::vector<std::string>& positional,
              const std::string& sig_path, bool oracle, std::optional<std::size_t> max, bool no_bijections,
              std::optional<long> timeout_ms, const std::string& out_path) {
    std::size_t next = 0;
    if (pattern_path.empty() && next < positional.size())
        pattern_path = positional[next++];
    if (subject_path.empty() && next < positional.size())
        subject_path = positional[next++];
    if (pattern_path.empty() || subject_path.empty() || next != positional.size())
        throw usage_error("match needs exactly one pattern and one subject");
    const auto subject = load_graph(subject_path, load_signature(sig_path));
    const auto pattern = load_graph(pattern_path, subject.signature_ptr());

    std::vector<hopg::Morphism> ms;
    bool truncated = false;
    if (oracle) {
        ms = hopg::brute_force_morphisms(pattern, subject);
        if (max && ms.size() > *max) {
            ms.resize(*max);
            truncated = true;
        }
    } else {
        hopg::MatchOptions opts;
        opts.max_solutions = max;
        opts.enumerate_ho_port_bijections = !no_bijections;
        if (timeout_ms)
            opts.timeout = std::chrono::milliseconds(*timeout_ms);
        auto r = hopg::find_morphisms(pattern, subject, opts);
        ms = std::move(r.morphisms);
        truncated = r.truncated || r.timed_out;
    }
    json arr = json::array();
    for (const auto& m : ms)
        arr.push_back(jio::to_json(m));
    Output out(out_path);
    out.stream() << jio::dump(arr);
    std::cerr << ms.size() << (ms.size() == 1 ? " morphism" : " morphisms") << (truncated ? " (truncated)" : "")
              << "\n";
    return 0;
}

int cmd_apply(const std::string& rule_path, const std::string& graph_path, const std::string& sig_path,
              std::size_t index, bool diff, const std::string& out_path) {
    const auto g = load_graph(graph_path, load_signature(sig_path));
    std::vector<hopg::Rule> rules;
    load_rules(rule_path, g.signature_ptr(), rules);
    const auto redexes = hopg::enumerate_redexes(rules, g);
    if (index >= redexes.size())
        throw hopg::error(hopg::errc::redex_out_of_range, "redex " + std::to_string(index) + " requested, " +
                                                              std::to_string(redexes.size()) + " available");
    const auto& r = redexes[index];
    const auto result = hopg::apply_with_diff(rules[r.rule_index], r.morphism, g);
    Output out(out_path);
    if (diff) {
        out.stream() << jio::dump({{"graph", jio::to_json(result.graph, true)},
                                   {"rule", r.rule},
                                   {"diff", hopg::session::diff_json(result)}});
    } else {
        out.stream() << jio::dump(jio::to_json(result.graph, true));
    }
    return 0;
}

int cmd_normalize(const std::vector<std::string>& rule_paths, const std::string& graph_path,
                  const std::string& sig_path, const std::string& strategy, std::size_t max_steps,
                  const std::string& out_path) {
    const auto g = load_graph(graph_path, load_signature(sig_path));
    std::vector<hopg::Rule> rules;
    for (const auto& p : rule_paths)
        load_rules(p, g.signature_ptr(), rules);
    const auto s = strategy == "bfs" ? hopg::Strategy::exhaustive_bfs : hopg::Strategy::leftmost_first;
    const auto result = hopg::normalize(rules, g, s, max_steps);

    Output out(out_path);
    if (s == hopg::Strategy::leftmost_first) {
        const auto& nf = result.results.front();
        json body{{"graph", jio::to_json(nf.graph, true)}, {"derivation", jio::to_json(nf.derivation)}};
        if (result.step_limit_reached) {
            body["error"] = "StepLimitReached";
            body["message"] = "no normal form within " + std::to_string(max_steps) + " steps";
            out.stream() << jio::dump(body);
            return 1;
        }
        out.stream() << jio::dump(body);
        return 0;
    }
    json forms = json::array();
    for (const auto& nf : result.results)
        forms.push_back({{"graph", jio::to_json(nf.graph, true)}, {"derivation", jio::to_json(nf.derivation)}});
    json body{{"normal_forms", forms}, {"revisited", result.revisited}};
    if (result.step_limit_reached) {
        body["error"] = "StepLimitReached";
        body["message"] = "exploration not finished within " + std::to_string(max_steps) + " steps";
        out.stream() << jio::dump(body);
        return 1;
    }
    out.stream() << jio::dump(body);
    return 0;
}

int cmd_export(const std::string& file, const std::string& sig_path, bool as_dot, const std::string& out_path) {
    const auto j = jio::read_file(file);
    const auto kind = detect_kind(j);
    if (kind == "signature")
        throw hopg::error(hopg::errc::parse_error, "export takes a graph or rule file");
    Output out(out_path);
    if (kind == "rule") {
        const auto r = jio::rule_from_json(j, load_signature(sig_path));
        out.stream() << (as_dot ? hopg::dot::to_dot(r) : jio::dump(jio::to_json(r, true)));
    } else {
        const auto g = jio::graph_from_json(j, load_signature(sig_path));
        out.stream() << (as_dot ? hopg::dot::to_dot(g) : jio::dump(jio::to_json(g, true)));
    }
    return 0;
}

int cmd_fixtures(std::string dir) {
    namespace pn = hopg::proofnets;
    if (dir.empty()) {
        const char* env = std::getenv("HOPORT_FIXTURES");
        dir = env && *env ? env : "fixtures";
    }
    fs::create_directories(fs::path(dir) / "rules");
    fs::create_directories(fs::path(dir) / "loops");
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const json& j) {
        jio::write_file((fs::path(dir) / name).string(), j);
        written.push_back(name);
    };
    put("proof_signature.json", jio::to_json(*pn::proof_signature_ptr()));
    put("fig4_signature.json", jio::to_json(*pn::fig4_signature()));
    put("fig5_signature.json", jio::to_json(*pn::fig5_signature()));
    put("example_proof.json", jio::to_json(pn::example_proof(), true));
    put("fig4_subject.json", jio::to_json(pn::fig4_subject(), true));
    const auto l = pn::fig4_patterns();
    put("fig4_L1.json", jio::to_json(l.l1, true));
    put("fig4_L2.json", jio::to_json(l.l2, true));
    put("fig4_L3.json", jio::to_json(l.l3, true));
    put("fig4_L4.json", jio::to_json(l.l4, true));
    put("fig5_subject.json", jio::to_json(pn::fig5_subject(), true));
    put("fig5_doubled_subject.json", jio::to_json(pn::fig5_doubled_subject(), true));
    put("fig5_pattern.json", jio::to_json(pn::fig5_pattern(), true));
    put("fig5_pattern_arity2.json", jio::to_json(pn::fig5_pattern_arity2(), true));
    put("duplication_subject.json", jio::to_json(pn::duplication_subject(), true));
    put("erasure_subject.json", jio::to_json(pn::erasure_subject(), true));
    put("black_hole_subject.json", jio::to_json(pn::black_hole_subject(), true));
    put("rules/beta.json", jio::to_json(pn::beta_rule(), true));
    put("rules/duplicate.json", jio::to_json(pn::duplication_rule(), true));
    put("rules/erase.json", jio::to_json(pn::erasure_rule(), true));
    put("rules/drop_weakening.json", jio::to_json(pn::black_hole_rule(), true));
    put("loops/identity.json", jio::to_json(pn::identity_rule(), true));
    json names = json::array();
    for (const auto& n : written)
        names.push_back(n);
    std::cout << jio::dump({{"directory", dir}, {"files", names}});
    return 0;
}

httplib::Server* running_server = nullptr;

void stop_server(int) {
    if (running_server)
        running_server->stop();
}

int cmd_serve(const std::string& host, int port, const std::string& snapshot) {
    hopg::session::SessionStore store;
    if (!snapshot.empty() && fs::exists(snapshot))
        store.restore(jio::read_file(snapshot));
    httplib::Server http;
    hopg::server::mount(http, store);
    running_server = &http;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    int bound = port;
    if (port == 0) {
        bound = http.bind_to_any_port(host);
    } else if (!http.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) {
        std::cout << jio::dump({{"error", "BindFailed"}, {"message", "cannot listen on " + host + ":" + std::to_string(port)}});
        return 1;
    }
    std::cerr << "listening on http://" << host << ":" << bound << "\n";
    http.listen_after_bind();
    running_server = nullptr;
    if (!snapshot.empty())
        jio::write_file(snapshot, store.snapshot());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Higher-order port-graph matching and rewriting"};
    app.require_subcommand(1);

    std::string sig_path, out_path;

    auto* validate = app.add_subcommand("validate", "check a signature, graph or rule file");
    std::string validate_file, validate_kind = "auto";
    validate->add_option("file", validate_file, "JSON file")->required();
    validate->add_option("--kind", validate_kind, "file kind")
        ->check(CLI::IsMember({"auto", "signature", "graph", "rule"}));
    validate->add_option("-S,--signature", sig_path, "signature for files without an embedded one");

    auto* match = app.add_subcommand("match", "enumerate morphisms from a pattern into a subject");
    std::string pattern_path, subject_path;
    std::vector<std::string> match_files;
    std::optional<std::size_t> max;
    std::optional<long> timeout_ms;
    bool oracle = false, no_bijections = false;
    match->add_option("-p,--pattern", pattern_path, "pattern graph");
    match->add_option("-s,--subject", subject_path, "subject graph");
    match->add_option("files", match_files, "pattern and subject, if not given as flags");
    match->add_option("-S,--signature", sig_path, "signature for files without an embedded one");
    match->add_flag("--oracle", oracle, "use the brute-force enumerator");
    match->add_option("--max", max, "stop after this many morphisms");
    match->add_flag("--no-port-bijections", no_bijections, "one port ordering per higher-order image");
    match->add_option("--timeout-ms", timeout_ms, "wall-clock budget");
    match->add_option("-o,--output", out_path, "output file");

    auto* apply = app.add_subcommand("apply", "apply one redex of a rule");
    std::string rule_path, graph_path;
    std::size_t redex = 0;
    bool diff = false;
    apply->add_option("-r,--rule", rule_path, "rule file or directory")->required();
    apply->add_option("-g,--graph", graph_path, "subject graph")->required();
    apply->add_option("--redex", redex, "index into the redex list");
    apply->add_flag("--diff", diff, "also print removed, added and rewired elements");
    apply->add_option("-S,--signature", sig_path, "signature for files without an embedded one");
    apply->add_option("-o,--output", out_path, "output file");

    auto* normalize = app.add_subcommand("normalize", "rewrite until no rule applies");
    std::vector<std::string> rule_paths;
    std::string strategy = "leftmost";
    std::size_t max_steps = 1000;
    normalize->add_option("-R,--rules", rule_paths, "rule files or directories")->required();
    normalize->add_option("-g,--graph", graph_path, "subject graph")->required();
    normalize->add_option("--strategy", strategy, "leftmost or bfs")->check(CLI::IsMember({"leftmost", "bfs"}));
    normalize->add_option("--max-steps", max_steps, "step budget");
    normalize->add_option("-S,--signature", sig_path, "signature for files without an embedded one");
    normalize->add_option("-o,--output", out_path, "output file");

    auto* exp = app.add_subcommand("export", "write a graph or rule as DOT or canonical JSON");
    std::string export_file;
    bool as_dot = false, as_json = false;
    exp->add_option("file", export_file, "graph or rule file")->required();
    auto* dot_flag = exp->add_flag("--dot", as_dot, "Graphviz output");
    auto* json_flag = exp->add_flag("--json", as_json, "canonical JSON output");
    dot_flag->excludes(json_flag);
    exp->add_option("-S,--signature", sig_path, "signature for files without an embedded one");
    exp->add_option("-o,--output", out_path, "output file");

    auto* fixtures = app.add_subcommand("fixtures", "write the built-in example graphs and rules");
    std::string fixture_dir;
    fixtures->add_option("-o,--output", fixture_dir, "directory (default $HOPORT_FIXTURES or ./fixtures)");

    auto* serve = app.add_subcommand("serve", "run the REST server");
    std::string host = "127.0.0.1", snapshot;
    int port = 8080;
    serve->add_option("--host", host, "address to bind");
    serve->add_option("--port", port, "port, 0 for any free one");
    serve->add_option("--snapshot", snapshot, "load sessions from and save them to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (exp->parsed() && !as_dot && !as_json) {
        std::cerr << "export needs --dot or --json\n";
        return 2;
    }

    try {
        if (validate->parsed())
            return cmd_validate(validate_file, validate_kind, sig_path);
        if (match->parsed())
            return cmd_match(pattern_path, subject_path, match_files, sig_path, oracle, max, no_bijections, timeout_ms,
                             out_path);
        if (apply->parsed())
            return cmd_apply(rule_path, graph_path, sig_path, redex, diff, out_path);
        if (normalize->parsed())
            return cmd_normalize(rule_paths, graph_path, sig_path, strategy, max_steps, out_path);
        if (exp->parsed())
            return cmd_export(export_file, sig_path, as_dot, out_path);
        if (fixtures->parsed())
            return cmd_fixtures(fixture_dir);
        if (serve->parsed())
            return cmd_serve(host, port, snapshot);
    } catch (const usage_error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const hopg::error& e) {
        std::cout << jio::dump({{"error", std::string(hopg::to_string(e.code()))},
                                {"message", hopg::session::message_of(e)}});
        return 1;
    } catch (const std::exception& e) {
        std::cout << jio::dump({{"error", "Internal"}, {"message", e.what()}});
        return 1;
    }
    return 2;
}
