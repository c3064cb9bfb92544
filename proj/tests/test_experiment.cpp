#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "antsel/errors.hpp"
#include "antsel/experiment.hpp"
#include "antsel/io.hpp"

using namespace antsel;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& label) {
    fs::path dir = fs::temp_directory_path() / ("antsel_" + label);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json base_spec(const std::string& output_dir) {
    return nlohmann::json{
        {"channel",
         {{"n_tx", 6}, {"n_rx", 3}, {"n_subcarriers", 4}, {"n_taps", 2}, {"seed", 7}}},
        {"ga",
         {{"population_size", 6},
          {"crossover_rate", 0.5},
          {"max_generations", 5},
          {"mutation_strategy", "adaptive"},
          {"adaptive_partner_mode", "best_swap"},
          {"fitness_batch_size", 10}}},
        {"snr_grid", {15.0}},
        {"nt_grid", {2}},
        {"repetitions", 2},
        {"output_dir", output_dir}};
}

fs::path write_spec(const fs::path& dir, const nlohmann::json& spec) {
    fs::path path = dir / "spec_in.json";
    std::ofstream os(path);
    os << spec.dump(2) << '\n';
    return path;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream is(path);
    REQUIRE(is.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) {
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.push_back("");
    }
    return fields;
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream is(path);
    REQUIRE(is.good());
    return nlohmann::json::parse(is);
}

}  // namespace

TEST_CASE("experiment spec JSON ingestion") {
    nlohmann::json j = base_spec("out");
    ExperimentSpec spec = ExperimentSpec::from_json(j);
    CHECK(spec.channel.n_tx == 6);
    CHECK(spec.ga.population_size == 6);
    CHECK(spec.snr_grid == std::vector<double>{15.0});
    CHECK(spec.nt_grid == std::vector<int>{2});
    CHECK(spec.repetitions == 2);
    CHECK(spec.output_dir == "out");
    CHECK(spec.seed_policy == SeedPolicy::per_replicate);

    nlohmann::json round_trip = spec.to_json();
    CHECK(ExperimentSpec::from_json(round_trip).to_json() == round_trip);

    nlohmann::json fixed = j;
    fixed["seed_policy"] = "fixed";
    CHECK(ExperimentSpec::from_json(fixed).seed_policy == SeedPolicy::fixed);

    nlohmann::json missing = j;
    missing.erase("channel");
    CHECK_THROWS_AS(ExperimentSpec::from_json(missing), ConfigError);

    nlohmann::json unknown = j;
    unknown["typo"] = 1;
    CHECK_THROWS_AS(ExperimentSpec::from_json(unknown), ConfigError);

    nlohmann::json bad_policy = j;
    bad_policy["seed_policy"] = "alternating";
    CHECK_THROWS_AS(ExperimentSpec::from_json(bad_policy), ConfigError);

    // an infeasible nt entry is reported by its index
    nlohmann::json bad_nt = j;
    bad_nt["nt_grid"] = {2, 99};
    try {
        ExperimentSpec::from_json(bad_nt).validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("nt_grid[1]") != std::string::npos);
    }

    nlohmann::json no_reps = j;
    no_reps["repetitions"] = 0;
    CHECK_THROWS_AS(ExperimentSpec::from_json(no_reps).validate(), ConfigError);
}

TEST_CASE("spec file loading reports the failing line") {
    fs::path dir = fresh_dir("spec_load");
    fs::path bad = dir / "bad.json";
    {
        std::ofstream os(bad);
        os << "{\n  \"channel\": 1,\n  \"ga\": [,]\n}\n";
    }
    try {
        ExperimentSpec::load(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string message = e.what();
        CHECK(message.find("bad.json:3:") != std::string::npos);
    }

    CHECK_THROWS_AS(ExperimentSpec::load(dir / "absent.json"), ConfigError);
}

TEST_CASE("run command writes the documented layout") {
    fs::path dir = fresh_dir("cmd_run");
    fs::path out = dir / "out";
    fs::path spec_path = write_spec(dir, base_spec(out.string()));
    cmd_run(spec_path);

    CHECK(fs::exists(out / "spec.json"));
    CHECK(fs::exists(out / "metadata.json"));

    std::vector<std::string> aggregate = read_lines(out / "aggregate.csv");
    REQUIRE(aggregate.size() == 3);  // header + 2 replicates of one cell
    CHECK(aggregate[0] == "n_t,snr_db,capacity,best_subset");
    for (std::size_t i = 1; i < aggregate.size(); ++i) {
        std::vector<std::string> fields = split_csv(aggregate[i]);
        REQUIRE(fields.size() == 4);
        CHECK(fields[0] == "2");
        CHECK(fields[1] == "15.000000");
        CHECK(std::stod(fields[2]) > 0.0);
    }

    nlohmann::json rep0 = read_json(out / "runs" / "nt2_snr15" / "rep0.json");
    CHECK(rep0.at("n_t") == 2);
    CHECK(rep0.at("snr_db") == 15.0);
    CHECK(rep0.at("replicate") == 0);
    CHECK(rep0.at("seed") == 7);  // per_replicate: base 7 + replicate 0
    CHECK(rep0.at("strategy") == "adaptive");
    CHECK(rep0.at("best_subset").size() == 2);
    CHECK(rep0.at("evaluations").get<long long>() > 0);
    nlohmann::json rep1 = read_json(out / "runs" / "nt2_snr15" / "rep1.json");
    CHECK(rep1.at("seed") == 8);

    std::vector<std::string> trace = read_lines(out / "traces" / "nt2_snr15" / "rep0.csv");
    REQUIRE(trace.size() == 6);  // header + one row per generation
    CHECK(trace[0] == "generation,best_fitness,mean_fitness,best_subset");
    CHECK(split_csv(trace[1])[0] == "1");
    CHECK(split_csv(trace[5])[0] == "5");

    // the stored spec is the effective one and reloads cleanly
    ExperimentSpec stored = ExperimentSpec::load(out / "spec.json");
    CHECK(stored.repetitions == 2);
    CHECK(stored.nt_grid == std::vector<int>{2});

    // metadata carries the invocation but no result data
    nlohmann::json metadata = read_json(out / "metadata.json");
    CHECK(metadata.contains("created_utc"));
    CHECK(metadata.at("command") == "run");
}

TEST_CASE("fixed seed policy repeats the replicate verbatim") {
    fs::path dir = fresh_dir("cmd_run_fixed");
    fs::path out = dir / "out";
    nlohmann::json spec = base_spec(out.string());
    spec["repetitions"] = 3;
    spec["seed_policy"] = "fixed";
    cmd_run(write_spec(dir, spec));

    std::vector<std::string> aggregate = read_lines(out / "aggregate.csv");
    REQUIRE(aggregate.size() == 4);
    CHECK(aggregate[1] == aggregate[2]);
    CHECK(aggregate[2] == aggregate[3]);
}

TEST_CASE("selecting every antenna yields the full subset") {
    fs::path dir = fresh_dir("cmd_run_full");
    fs::path out = dir / "out";
    nlohmann::json spec = base_spec(out.string());
    spec["nt_grid"] = {6};
    spec["repetitions"] = 1;
    cmd_run(write_spec(dir, spec));
    nlohmann::json rep0 = read_json(out / "runs" / "nt6_snr15" / "rep0.json");
    CHECK(rep0.at("best_subset") == nlohmann::json({0, 1, 2, 3, 4, 5}));
}

TEST_CASE("reruns are byte identical") {
    fs::path dir = fresh_dir("cmd_run_repro");
    fs::path out_a = dir / "a";
    fs::path out_b = dir / "b";
    nlohmann::json spec = base_spec(out_a.string());
    fs::path spec_path = write_spec(dir, spec);
    cmd_run(spec_path);

    RunOptions options;
    options.out_override = out_b.string();
    cmd_run(spec_path, options);

    CHECK(read_text_file(out_a / "aggregate.csv") == read_text_file(out_b / "aggregate.csv"));
    CHECK(read_text_file(out_a / "runs" / "nt2_snr15" / "rep0.json") ==
          read_text_file(out_b / "runs" / "nt2_snr15" / "rep0.json"));
    CHECK(read_text_file(out_a / "traces" / "nt2_snr15" / "rep1.csv") ==
          read_text_file(out_b / "traces" / "nt2_snr15" / "rep1.csv"));
}

TEST_CASE("seed override reaches every replicate") {
    fs::path dir = fresh_dir("cmd_run_seed");
    fs::path out = dir / "out";
    nlohmann::json spec = base_spec(out.string());
    spec["repetitions"] = 1;
    RunOptions options;
    options.seed_override = 99;
    cmd_run(write_spec(dir, spec), options);
    nlohmann::json rep0 = read_json(out / "runs" / "nt2_snr15" / "rep0.json");
    CHECK(rep0.at("seed") == 99);
}

TEST_CASE("run and sweep agree on single-replicate cells") {
    fs::path dir = fresh_dir("cross_check");
    nlohmann::json spec = base_spec((dir / "run_out").string());
    spec["repetitions"] = 1;
    spec["nt_grid"] = {2, 4};
    fs::path spec_path = write_spec(dir, spec);
    cmd_run(spec_path);

    RunOptions sweep_options;
    sweep_options.out_override = (dir / "sweep_out").string();
    cmd_sweep_snr(spec_path, sweep_options);

    std::vector<std::string> aggregate = read_lines(dir / "run_out" / "aggregate.csv");
    std::vector<std::string> sweep = read_lines(dir / "sweep_out" / "sweep.csv");
    REQUIRE(aggregate.size() == 3);
    REQUIRE(sweep.size() == 3);
    CHECK(sweep[0] == "n_t,snr_db,capacity");
    for (std::size_t i = 1; i < 3; ++i) {
        std::vector<std::string> run_fields = split_csv(aggregate[i]);
        std::vector<std::string> sweep_fields = split_csv(sweep[i]);
        CHECK(run_fields[0] == sweep_fields[0]);
        CHECK(run_fields[1] == sweep_fields[1]);
        CHECK(run_fields[2] == sweep_fields[2]);  // mean over one replicate
    }
}

TEST_CASE("sweep capacity grows with snr") {
    fs::path dir = fresh_dir("cmd_sweep");
    fs::path out = dir / "out";
    nlohmann::json spec = base_spec(out.string());
    spec["snr_grid"] = {-10.0, 0.0, 10.0, 20.0};
    spec["nt_grid"] = {2, 4};
    spec["repetitions"] = 1;
    cmd_sweep_snr(write_spec(dir, spec));

    std::vector<std::string> sweep = read_lines(out / "sweep.csv");
    REQUIRE(sweep.size() == 1 + 2 * 4);
    double previous = 0.0;
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        std::vector<std::string> fields = split_csv(sweep[i]);
        double capacity = std::stod(fields[2]);
        bool first_of_group = (i - 1) % 4 == 0;
        if (!first_of_group) {
            CHECK(capacity > previous);
        }
        previous = capacity;
    }
}

TEST_CASE("convergence command pairs strategies on one batch") {
    fs::path dir = fresh_dir("cmd_conv");
    fs::path out = dir / "out";
    nlohmann::json spec = base_spec(out.string());
    spec["repetitions"] = 2;
    cmd_convergence(write_spec(dir, spec));

    std::vector<std::string> convergence = read_lines(out / "convergence.csv");
    CHECK(convergence[0] ==
          "n_t,snr_db,replicate,strategy,generation,evaluations,best_fitness,"
          "mean_fitness,best_subset");
    // 2 replicates x 2 strategies x 5 generations
    CHECK(convergence.size() == 1 + 2 * 2 * 5);

    std::vector<std::string> summary = read_lines(out / "summary.csv");
    CHECK(summary[0] ==
          "n_t,snr_db,replicate,adaptive_generations_to_final,plain_generations_to_final");
    REQUIRE(summary.size() == 3);
    for (std::size_t i = 1; i < summary.size(); ++i) {
        std::vector<std::string> fields = split_csv(summary[i]);
        REQUIRE(fields.size() == 5);
        int adaptive_gens = std::stoi(fields[3]);
        int plain_gens = std::stoi(fields[4]);
        CHECK(adaptive_gens >= 1);
        CHECK(adaptive_gens <= 5);
        CHECK(plain_gens >= 1);
        CHECK(plain_gens <= 5);
    }

    // on the shared batch the adaptive final best cannot trail plain's
    for (int rep = 0; rep < 2; ++rep) {
        std::string stem = "rep" + std::to_string(rep);
        std::vector<std::string> adaptive =
            read_lines(out / "traces" / "nt2_snr15" / (stem + "_adaptive.csv"));
        std::vector<std::string> plain =
            read_lines(out / "traces" / "nt2_snr15" / (stem + "_plain.csv"));
        double adaptive_final = std::stod(split_csv(adaptive.back())[1]);
        double plain_final = std::stod(split_csv(plain.back())[1]);
        CHECK(adaptive_final >= plain_final);
    }
}

TEST_CASE("single-generation convergence trace has one row per strategy") {
    fs::path dir = fresh_dir("cmd_conv_one");
    fs::path out = dir / "out";
    nlohmann::json spec = base_spec(out.string());
    spec["ga"]["max_generations"] = 1;
    spec["repetitions"] = 1;
    cmd_convergence(write_spec(dir, spec));
    std::vector<std::string> convergence = read_lines(out / "convergence.csv");
    CHECK(convergence.size() == 1 + 2);  // header + adaptive row + plain row
}

TEST_CASE("compare command reports nonnegative oracle gaps") {
    fs::path dir = fresh_dir("cmd_compare");
    fs::path out = dir / "out";
    nlohmann::json spec = base_spec(out.string());
    spec["nt_grid"] = {2, 4};
    spec["repetitions"] = 1;
    cmd_compare(write_spec(dir, spec));

    std::vector<std::string> compare = read_lines(out / "compare.csv");
    CHECK(compare[0] ==
          "n_t,snr_db,selected_adaptive,capacity_adaptive,selected_plain,"
          "capacity_plain,oracle_capacity,gap_adaptive,gap_plain");
    REQUIRE(compare.size() == 3);
    for (std::size_t i = 1; i < compare.size(); ++i) {
        std::vector<std::string> fields = split_csv(compare[i]);
        REQUIRE(fields.size() == 9);
        double adaptive = std::stod(fields[3]);
        double plain = std::stod(fields[5]);
        double oracle = std::stod(fields[6]);
        double gap_adaptive = std::stod(fields[7]);
        double gap_plain = std::stod(fields[8]);
        CHECK(adaptive <= oracle);
        CHECK(plain <= oracle);
        CHECK(gap_adaptive >= 0.0);
        CHECK(gap_plain >= 0.0);
    }
}

TEST_CASE("compare leaves oracle columns empty beyond the budget") {
    fs::path dir = fresh_dir("cmd_compare_budget");
    fs::path out = dir / "out";
    nlohmann::json spec = base_spec(out.string());
    spec["repetitions"] = 1;
    RunOptions options;
    options.oracle_budget = 10;  // C(6, 2) = 15 exceeds this
    cmd_compare(write_spec(dir, spec), options);

    std::vector<std::string> compare = read_lines(out / "compare.csv");
    REQUIRE(compare.size() == 2);
    std::vector<std::string> fields = split_csv(compare[1]);
    REQUIRE(fields.size() == 9);
    CHECK(fields[6].empty());
    CHECK(fields[7].empty());
    CHECK(fields[8].empty());
    CHECK(std::stod(fields[3]) > 0.0);
}

TEST_CASE("oracle command ranks every subset per cell") {
    fs::path dir = fresh_dir("cmd_oracle");
    fs::path out_a = dir / "a";
    nlohmann::json spec = base_spec(out_a.string());
    spec["repetitions"] = 1;
    spec["nt_grid"] = {2, 4};
    fs::path spec_path = write_spec(dir, spec);
    cmd_oracle(spec_path);

    nlohmann::json rep0 = read_json(out_a / "oracle" / "nt2_snr15" / "rep0.json");
    CHECK(rep0.at("n_t") == 2);
    CHECK(rep0.at("seed") == 7);
    CHECK(rep0.at("subsets_evaluated") == 15);
    CHECK(rep0.at("best_subset").size() == 2);

    std::vector<std::string> ranked =
        read_lines(out_a / "oracle" / "nt2_snr15" / "rep0_ranked.csv");
    CHECK(ranked.size() == 16);
    std::vector<std::string> ranked4 =
        read_lines(out_a / "oracle" / "nt4_snr15" / "rep0_ranked.csv");
    CHECK(ranked4.size() == 16);  // C(6, 4) = 15 as well

    fs::path out_b = dir / "b";
    RunOptions options;
    options.out_override = out_b.string();
    cmd_oracle(spec_path, options);
    CHECK(read_text_file(out_a / "oracle" / "nt2_snr15" / "rep0_ranked.csv") ==
          read_text_file(out_b / "oracle" / "nt2_snr15" / "rep0_ranked.csv"));

    // a cell beyond the budget aborts before any output appears
    fs::path out_c = dir / "c";
    RunOptions tight;
    tight.out_override = out_c.string();
    tight.oracle_budget = 10;
    CHECK_THROWS_AS(cmd_oracle(spec_path, tight), BudgetError);
    CHECK(!fs::exists(out_c / "oracle"));
}
