#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "aou/harness/runner.hpp"
#include "aou/mock/scripted_server.hpp"

using namespace aou;
using namespace aou::harness;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("aou-harness-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

RunConfig mock_run_config(const std::string& base_url, const fs::path& dir) {
    RunConfig config;
    config.dataset_path = AOU_SOURCE_DIR "/fixtures/mock/items.jsonl";
    config.format = DatasetFormat::GenericJsonl;
    config.strategy = "aou";
    config.llm.base_url = base_url;
    config.llm.temperature = 1.0;
    config.llm.max_tokens = 526;
    config.llm.backoff_initial_s = 0.0;
    config.llm.cache_dir = (dir / "cache").string();
    config.out_dir = (dir / "out").string();
    return config;
}

}  // namespace

TEST_CASE("dataset loaders normalize golds per format") {
    TempDir dir("datasets");

    SUBCASE("gsm8k gold comes after the final #### marker") {
        write_file(dir.path / "g.jsonl",
                   R"({"question":"Q1?","answer":"work... #### 72"})"
                   "\n"
                   R"({"question":"Q2?","answer":"steps #### 1 then more #### $1,234."})"
                   "\n"
                   R"({"question":"Q3?","answer":"no marker"})"
                   "\n");
        std::vector<std::string> skipped;
        auto records = load_dataset((dir.path / "g.jsonl").string(), DatasetFormat::Gsm8k,
                                    &skipped);
        REQUIRE(records.size() == 2);
        CHECK(records[0].gold == doctest::Approx(72));
        CHECK(records[1].gold == doctest::Approx(1234));
        REQUIRE(skipped.size() == 1);
        CHECK(skipped[0] == "gsm8k-3");
    }
    SUBCASE("svamp concatenates body and question") {
        write_file(dir.path / "s.json",
                   R"([{"ID":"chal-1","Body":"Ana had 4 pots.","Question":"How many legs?","Answer":4.5}])");
        auto records = load_dataset((dir.path / "s.json").string(), DatasetFormat::Svamp);
        REQUIRE(records.size() == 1);
        CHECK(records[0].id == "chal-1");
        CHECK(records[0].question == "Ana had 4 pots. How many legs?");
        CHECK(records[0].gold == doctest::Approx(4.5));
    }
    SUBCASE("multiarith reads sQuestion and lSolutions") {
        write_file(dir.path / "m.json",
                   R"([{"iIndex":7,"sQuestion":"How many?","lSolutions":[5.0]}])");
        auto records = load_dataset((dir.path / "m.json").string(), DatasetFormat::MultiArith);
        REQUIRE(records.size() == 1);
        CHECK(records[0].id == "multiarith-7");
        CHECK(records[0].gold == doctest::Approx(5));
    }
    SUBCASE("generic jsonl") {
        write_file(dir.path / "x.jsonl", R"({"id":"x","question":"1+1?","answer":"2"})"
                                         "\n");
        auto records = load_dataset((dir.path / "x.jsonl").string(),
                                    DatasetFormat::GenericJsonl);
        REQUIRE(records.size() == 1);
        CHECK(records[0].gold == doctest::Approx(2));
    }
}

TEST_CASE("score applies the relative tolerance") {
    CHECK(score(4.5, 4.5) == Verdict::Correct);
    CHECK(score(std::nullopt, 7) == Verdict::Abstained);
    CHECK(score(2.0000000001, 2) == Verdict::Correct);
    CHECK(score(2.1, 2) == Verdict::Incorrect);
    CHECK(score(1000000.5, 1000000) == Verdict::Correct);  // relative, not absolute
    // Gold normalization is insensitive to textual form.
    CHECK(normalize_gold("72") == normalize_gold("72.0"));
    CHECK(normalize_gold(" $1,234.50 ") == doctest::Approx(1234.5));
    CHECK_FALSE(normalize_gold("n/a").has_value());
}

TEST_CASE("metrics count identities") {
    std::vector<ItemResult> items(5);
    items[0].verdict = Verdict::Correct;
    items[1].verdict = Verdict::Correct;
    items[2].verdict = Verdict::Incorrect;
    items[3].verdict = Verdict::Abstained;
    items[4].verdict = Verdict::Abstained;
    items[4].failed = true;
    auto m = score_items(items);
    CHECK(m.n_items == 5);
    CHECK(m.n_answered == 3);
    CHECK(m.n_correct == 2);
    CHECK(m.n_failed == 1);
    CHECK(m.n_items == m.n_answered + 2);
    CHECK(m.n_correct <= m.n_answered);
    CHECK(m.accuracy == doctest::Approx(0.4));
    CHECK(m.answered_accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(m.abstention_rate == doctest::Approx(0.4));
}

TEST_CASE("run_experiment over the scripted mock dataset") {
    ::setenv("AOU_API_KEY", "test-key", 1);
    TempDir dir("run");
    auto rules = mock::ScriptedServer::load_script(AOU_SOURCE_DIR "/fixtures/mock/script.json");
    mock::ScriptedServer server(std::move(rules));
    server.start();
    auto config = mock_run_config(server.base_url(), dir.path);

    auto metrics = run_experiment(config);
    CHECK(metrics.n_items == 10);
    CHECK(metrics.accuracy == doctest::Approx(1.0));
    CHECK(metrics.n_failed == 0);
    for (const auto& item : metrics.items) CHECK(item.warnings.empty());
    CHECK(fs::exists(dir.path / "out" / "report.json"));
    CHECK(fs::exists(dir.path / "out" / "report.tsv"));

    SUBCASE("rerun over the completed transcript makes no network calls") {
        const long long before = server.request_count();
        auto again = run_experiment(config);
        CHECK(server.request_count() == before);
        CHECK(again.accuracy == doctest::Approx(1.0));
        CHECK(again.n_items == 10);
    }
    SUBCASE("interrupted run resumes to byte-identical transcripts") {
        auto transcripts = dir.path / "out" / "transcripts.jsonl";
        const std::string full = read_file(transcripts);

        auto partial_config = config;
        partial_config.out_dir = (dir.path / "out2").string();
        partial_config.limit = 4;  // "interrupt" after four items
        run_experiment(partial_config);
        partial_config.limit = -1;
        run_experiment(partial_config);
        CHECK(read_file(dir.path / "out2" / "transcripts.jsonl") == full);
    }
    SUBCASE("eval re-scores existing transcripts") {
        auto records = load_dataset(config.dataset_path, config.format);
        auto evaluated = evaluate_transcripts((dir.path / "out" / "transcripts.jsonl").string(),
                                              records, "aou", config_hash(config));
        CHECK(evaluated.accuracy == doctest::Approx(1.0));
        CHECK(evaluated.n_items == 10);
    }
}

TEST_CASE("run_experiment aborts on configuration errors before any call") {
    TempDir dir("cfg");
    auto config = mock_run_config("http://127.0.0.1:9", dir.path);

    SUBCASE("unknown strategy") {
        config.strategy = "guess";
        CHECK_THROWS_AS(run_experiment(config), ConfigError);
    }
    SUBCASE("missing credential with a cold cache") {
        ::unsetenv("AOU_MISSING_RUN_KEY");
        config.llm.api_key_env = "AOU_MISSING_RUN_KEY";
        CHECK_THROWS_AS(run_experiment(config), ConfigError);
    }
    SUBCASE("bad llm parameters") {
        ::setenv("AOU_API_KEY", "test-key", 1);
        config.llm.max_tokens = 0;
        CHECK_THROWS_AS(run_experiment(config), ConfigError);
    }
}

TEST_CASE("config hash separates strategies and models") {
    RunConfig a;
    a.strategy = "aou";
    RunConfig b = a;
    b.strategy = "cot";
    CHECK(config_hash(a) != config_hash(b));
    RunConfig c = a;
    c.llm.model = "other-model";
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a) == config_hash(a));
}

TEST_CASE("bounded-parallel execution yields byte-identical transcripts") {
    ::setenv("AOU_API_KEY", "test-key", 1);
    TempDir dir("jobs");
    auto rules = mock::ScriptedServer::load_script(AOU_SOURCE_DIR "/fixtures/mock/script.json");
    mock::ScriptedServer server(std::move(rules));
    server.start();

    auto sequential = mock_run_config(server.base_url(), dir.path);
    sequential.out_dir = (dir.path / "seq").string();
    sequential.jobs = 1;
    run_experiment(sequential);

    auto parallel = sequential;
    parallel.out_dir = (dir.path / "par").string();
    parallel.jobs = 3;
    run_experiment(parallel);

    CHECK(read_file(dir.path / "seq" / "transcripts.jsonl") ==
          read_file(dir.path / "par" / "transcripts.jsonl"));
}
