#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "novscope/error.hpp"
#include "novscope/io.hpp"
#include "novscope/pipeline.hpp"

using namespace novscope;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("novscope_pipe_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunConfig tiny(const fs::path& root) {
    RunConfig rc;
    rc.data_dir = root / "data";
    rc.cache_dir = root / "cache";
    rc.output_dir = root / "out";
    rc.synth.n_papers = 300;
    rc.synth.n_authors = 120;
    rc.fit.dim = 4;
    rc.fit.max_epochs = 30;
    return rc;
}

std::string slurp(const fs::path& p) { return io::read_text_file(p); }

std::string config_text(const fs::path& root) {
    std::ostringstream s;
    s << "[paths]\ndata_dir = " << (root / "data").string() << "\ncache_dir = " << (root / "cache").string()
      << "\noutput_dir = " << (root / "out").string()
      << "\n[synth]\nn_papers = 300\nn_authors = 120\n[fit]\ndim = 4\nmax_epochs = 30\n";
    return s.str();
}

int cli(const std::string& args) {
    std::string cmd = std::string(NOVSCOPE_CLI) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run config parsing") {
    auto c = parse_run_config("[run]\nseed = 9\nchannels = context\n[fit]\ndim = 3\noptimizer = lbfgs\n"
                              "[build]\nhistory_window = 2\n[paths]\ncache_dir = c\n",
                              "/base");
    CHECK(c.seed == 9);
    CHECK(c.channels == std::vector<Channel>{Channel::context});
    CHECK(c.fit.dim == 3);
    CHECK(c.fit.optimizer == Optimizer::lbfgs);
    CHECK(*c.snapshot.history_window == 2);
    CHECK(c.cache_dir == fs::path("/base/c"));
    CHECK_THROWS_AS(parse_run_config("[fit]\ndimm = 3\n"), ValidationError);
    CHECK_THROWS_AS(parse_run_config("[nope]\nx = 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_run_config("[fit]\ndim = three\n"), ValidationError);

    auto defaults = parse_run_config(format_run_config());
    CHECK(format_run_config(defaults) == format_run_config());
    CHECK(stage_settings(defaults, Stage::fit) == stage_settings(RunConfig{}, Stage::fit));
    CHECK(stage_from_string("report") == Stage::report);
    CHECK_THROWS_AS(stage_from_string("fitt"), ValidationError);
}

TEST_CASE("environment overrides the cache directory") {
    RunConfig c;
    ::setenv("NOVSCOPE_CACHE_DIR", "/tmp/elsewhere", 1);
    apply_environment(c);
    ::unsetenv("NOVSCOPE_CACHE_DIR");
    CHECK(c.cache_dir == fs::path("/tmp/elsewhere"));
}

TEST_CASE("default models cover both channels") {
    auto specs = default_model_specs({Channel::content, Channel::context});
    REQUIRE(!specs.empty());
    bool ref = false, con = false;
    for (const auto& s : specs) {
        ref = ref || s.outcome.find("_ref") != std::string::npos;
        con = con || s.outcome.find("_con") != std::string::npos;
    }
    CHECK(ref);
    CHECK(con);
}

TEST_CASE("stages, stamps, stale caches and manifest") {
    auto root = scratch("stages");
    auto rc = tiny(root);
    Pipeline p(rc);
    try {
        p.run(Stage::build);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("ingest") != std::string::npos);
    }
    p.run(Stage::synth);
    auto ingest = p.run(Stage::ingest);
    CHECK(fs::exists(rc.cache_dir / "stamps" / "ingest.json"));
    CHECK(ingest.config_hash == p.expected_hash(Stage::ingest));
    CHECK_THROWS_AS(p.run(Stage::fit), ValidationError);
    for (auto s : {Stage::build, Stage::fit, Stage::score, Stage::metrics, Stage::report}) p.run(s);
    CHECK(fs::exists(rc.output_dir / "scores.csv"));
    CHECK(fs::exists(rc.output_dir / "metrics.csv"));
    CHECK(fs::exists(rc.output_dir / "report.txt"));

    std::ifstream manifest(rc.output_dir / "manifest.jsonl");
    int lines = 0;
    for (std::string line; std::getline(manifest, line);) {
        CHECK(line.find("\"config_hash\"") != std::string::npos);
        ++lines;
    }
    CHECK(lines == 7);

    auto changed = rc;
    changed.fit.max_epochs = 31;
    Pipeline stale(changed);
    CHECK_THROWS_AS(stale.run(Stage::score), StaleCacheError);
    Pipeline forced(changed, true);
    CHECK_NOTHROW(forced.run(Stage::score));
    Pipeline refit(changed);
    refit.run(Stage::fit);
    CHECK_NOTHROW(refit.run(Stage::score));

    auto rerun = tiny(root / "rerun");
    rerun.fit.max_epochs = 31;
    Pipeline r(rerun);
    for (auto s : {Stage::synth, Stage::ingest, Stage::build, Stage::fit, Stage::score}) r.run(s);
    CHECK(slurp(rerun.output_dir / "scores.csv") == slurp(rc.output_dir / "scores.csv"));
    fs::remove_all(root);
}

TEST_CASE("CLI exit codes") {
    auto root = scratch("cli");
    auto cfg = root / "run.ini";
    io::write_text_file(cfg, config_text(root));
    auto c = "--config " + cfg.string() + " ";
    CHECK(cli(c + "build") == 2);
    CHECK(cli(c + "synth") == 0);
    CHECK(cli(c + "ingest") == 0);
    CHECK(cli(c + "build") == 0);
    CHECK(cli(c + "--seed 5 fit") == 3);
    CHECK(cli(c + "--seed 5 --force fit") == 0);
    CHECK(cli(c + "--seed 5 score") == 3);
    CHECK(cli(c + "fit") == 0);
    CHECK(cli(c + "score") == 0);
    CHECK(cli(c + "--channel nope score") != 0);
    CHECK(cli("") != 0);
    CHECK(cli("--help") == 0);
    fs::remove_all(root);
}
