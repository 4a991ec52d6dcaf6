#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "test_support.hpp"

namespace {

const std::string kCli = RATIONMEM_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path();
    const auto out_file = dir / ("rationmem_cli_out_" + std::to_string(counter) + ".txt");
    const auto err_file = dir / ("rationmem_cli_err_" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd =
        kCli + " " + args + " > " + out_file.string() + " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    std::filesystem::remove(out_file);
    std::filesystem::remove(err_file);
    return r;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() / ("rationmem_cli_" + tag);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string fixture_flags() {
    return "--corpus " + testsup::fixture_corpus_path().string() + " --kb-dir " +
           (testsup::data_dir() / "fixture" / "kb").string() + " --category ter";
}

}  // namespace

TEST_CASE("--help exits 0 for every command and documents flags") {
    CHECK(run("--help").exit_code == 0);
    for (const std::string cmd :
         {"train", "eval", "predict", "explain", "stats", "gradcheck"}) {
        const RunResult r = run(cmd + " --help");
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("--") != std::string::npos);
    }
    CHECK(run("train --help").out.find("--weak") != std::string::npos);
    CHECK(run("explain --help").out.find("--top-k") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run("").exit_code == 1);
    CHECK(run("no-such-command").exit_code == 1);
    CHECK(run("train").exit_code == 1);  // missing required flags
    TempDir dir("contradictory");
    const RunResult r = run("train " + fixture_flags() + " --out " + dir.path.string() +
                            " --weak --lambda 2");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("contradictory") != std::string::npos);
}

TEST_CASE("train, eval, predict, explain on the fixture") {
    TempDir dir("roundtrip");
    const std::string config = (dir.path / "config.json").string();
    {
        std::ofstream c(config);
        c << R"({"epochs": 30, "embedding_dim": 16, "seed": 3})";
    }
    const RunResult train_run = run("train " + fixture_flags() + " --config " + config +
                                    " --out " + (dir.path / "run").string());
    CAPTURE(train_run.err);
    CHECK(train_run.exit_code == 0);
    CHECK(train_run.out.find("final validation metrics") != std::string::npos);
    const auto ckpt = dir.path / "run" / "checkpoint.rmck";
    CHECK(std::filesystem::exists(ckpt));
    CHECK(std::filesystem::exists(dir.path / "run" / "history.jsonl"));

    const std::string model_flags = "--checkpoint " + ckpt.string() + " --kb-dir " +
                                    (testsup::data_dir() / "fixture" / "kb").string();

    const RunResult eval_run = run("eval " + model_flags + " --corpus " +
                                   testsup::fixture_corpus_path().string() + " --out " +
                                   (dir.path / "eval").string());
    CHECK(eval_run.exit_code == 0);
    CHECK(eval_run.out.find("precision") != std::string::npos);
    CHECK(std::filesystem::exists(dir.path / "eval" / "eval_report.json"));
    CHECK(std::filesystem::exists(dir.path / "eval" / "explanations.jsonl"));

    {
        std::ofstream input(dir.path / "lines.txt");
        input << "We may terminate your account.\n\nNothing unusual here.\n";
    }
    const RunResult predict_run =
        run("predict " + model_flags + " --input " + (dir.path / "lines.txt").string());
    CHECK(predict_run.exit_code == 0);
    std::istringstream lines(predict_run.out);
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        ++count;
        const double p = std::stod(line);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
    CHECK(count == 3);  // one probability per input line, empty line included

    const RunResult explain_run =
        run("explain " + model_flags + " --text \"Accounts left dormant may be closed.\" --top-k 3");
    CHECK(explain_run.exit_code == 0);
    CHECK(explain_run.out.find("probability of unfairness") != std::string::npos);
    // rationale text, not just the ID
    CHECK(explain_run.out.find("Dormant accounts are closed") != std::string::npos);
    // exactly three ranked entries, weights descending
    std::vector<double> weights;
    std::istringstream explain_lines(explain_run.out);
    std::string explain_line;
    while (std::getline(explain_lines, explain_line)) {
        const auto open = explain_line.find(". [");
        if (open != std::string::npos) {
            weights.push_back(std::stod(explain_line.substr(open + 3)));
        }
    }
    REQUIRE(weights.size() == 3);
    CHECK(weights[0] >= weights[1]);
    CHECK(weights[1] >= weights[2]);

    const RunResult explain_by_id = run("explain " + model_flags + " --corpus " +
                                        testsup::fixture_corpus_path().string() +
                                        " --clause-id doc07-c1 --top-k 2");
    CHECK(explain_by_id.exit_code == 0);
    CHECK(explain_by_id.out.find("doc07-c1") != std::string::npos);

    const RunResult explain_missing = run("explain " + model_flags + " --corpus " +
                                          testsup::fixture_corpus_path().string() +
                                          " --clause-id ghost");
    CHECK(explain_missing.exit_code == 2);
}

TEST_CASE("data validation failures exit 2") {
    TempDir dir("baddata");
    const auto corpus = dir.path / "bad.jsonl";
    {
        std::ofstream out(corpus);
        out << R"({"id": "c1", "document_id": "d", "text": "Account may be terminated.", "labels": {"ter": "potentially_unfair"}, "gold_rationales": {"ter": ["ghost_id"]}})"
            << "\n";
    }
    const RunResult r = run("train --corpus " + corpus.string() + " --kb-dir " +
                            (testsup::data_dir() / "fixture" / "kb").string() +
                            " --category ter --out " + (dir.path / "out").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("ghost_id") != std::string::npos);
    CHECK(r.err.find("line 1") != std::string::npos);

    const RunResult missing = run("stats --corpus /nonexistent.jsonl");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("stats output matches the committed expected file byte for byte") {
    const RunResult r = run("stats --corpus " + testsup::fixture_corpus_path().string());
    CHECK(r.exit_code == 0);
    const std::string expected = slurp(testsup::data_dir() / "fixture" / "expected_stats.txt");
    REQUIRE(!expected.empty());
    CHECK(r.out == expected);
}

TEST_CASE("fixed seed runs are bit-reproducible and write only under --out") {
    TempDir dir("repro");
    const std::string config = (dir.path / "config.json").string();
    {
        std::ofstream c(config);
        c << R"({"epochs": 12, "embedding_dim": 12})";
    }
    // snapshot of the scratch directory before the runs
    std::set<std::string> before;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path)) {
        before.insert(entry.path().string());
    }

    const std::string base = "train " + fixture_flags() + " --config " + config + " --seed 11";
    const RunResult a = run(base + " --out " + (dir.path / "a").string());
    const RunResult b = run(base + " --out " + (dir.path / "b").string());
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(slurp(dir.path / "a" / "checkpoint.rmck") == slurp(dir.path / "b" / "checkpoint.rmck"));
    CHECK(slurp(dir.path / "a" / "history.jsonl") == slurp(dir.path / "b" / "history.jsonl"));

    // nothing appeared outside the two --out directories
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path)) {
        const std::string p = entry.path().string();
        if (p.find((dir.path / "a").string()) == 0 || p.find((dir.path / "b").string()) == 0) {
            continue;
        }
        CHECK(before.count(p) == 1);
    }
}

TEST_CASE("gradcheck command") {
    const RunResult r = run("gradcheck --seed 2 --cases 6");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("max relative error") != std::string::npos);
    // default flags hold for arbitrary seeds
    CHECK(run("gradcheck --seed 7").exit_code == 0);
}

TEST_CASE("training a second category against its own knowledge base") {
    // the fixture also carries unilateral-change labels
    TempDir dir("chrun");
    const std::string config = (dir.path / "config.json").string();
    {
        std::ofstream c(config);
        c << R"({"epochs": 10, "embedding_dim": 8})";
    }
    const RunResult r = run("train --corpus " + testsup::fixture_corpus_path().string() +
                            " --kb-dir " + (testsup::data_dir() / "fixture" / "kb").string() +
                            " --category ch --config " + config + " --out " +
                            (dir.path / "out").string());
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(dir.path / "out" / "checkpoint.rmck"));
}

TEST_CASE("RATIONMEM_LOG controls verbosity") {
    TempDir dir("logging");
    const std::string config = (dir.path / "config.json").string();
    {
        std::ofstream c(config);
        c << R"({"epochs": 3, "embedding_dim": 8})";
    }
    const std::string base =
        "train " + fixture_flags() + " --config " + config + " --out " + (dir.path / "o").string();

    setenv("RATIONMEM_LOG", "debug", 1);
    const RunResult verbose = run(base);
    setenv("RATIONMEM_LOG", "error", 1);
    const RunResult quiet = run(base);
    unsetenv("RATIONMEM_LOG");

    CHECK(verbose.exit_code == 0);
    CHECK(quiet.exit_code == 0);
    CHECK(verbose.err.find("epoch") != std::string::npos);
    CHECK(quiet.err.find("[info]") == std::string::npos);
    CHECK(quiet.err.find("[debug]") == std::string::npos);
}
