#include <doctest.h>

#include <fstream>
#include <sstream>

#include "genclust/cli.hpp"
#include "genclust/runner.hpp"
#include "support.hpp"
#include "xml_check.hpp"

using namespace genclust;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& s) {
    std::ofstream(p) << s;
}

struct Workspace {
    std::filesystem::path dir = support::scratch_dir("cli");
    std::filesystem::path data = dir / "blobs.csv";
    std::filesystem::path config = dir / "grid.json";

    Workspace() {
        write_csv(support::blob_dataset(), data);
        spit(config, json{{"algorithms", {"kmeans", "hier"}},
                          {"k_min", 2},
                          {"k_max", 5},
                          {"iterations", 2},
                          {"internal_index", "silhouette"},
                          {"external_indices", {"ari", "percent"}},
                          {"base_seed", 5}}
                         .dump());
    }
    ~Workspace() { std::filesystem::remove_all(dir); }

    Outcome run(const std::string& out, std::vector<std::string> extra = {}) const {
        std::vector<std::string> args{"run", "--config", config.string(), "--data", data.string(), "--out",
                                      (dir / out).string(), "--class-column", "4"};
        args.insert(args.end(), extra.begin(), extra.end());
        return cli(args);
    }
};

} // namespace

TEST_CASE("run writes the report, labels and charts") {
    Workspace ws;
    const auto r = ws.run("results");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto out = ws.dir / "results";
    for (const char* f : {"report.json", "report.csv", "curves.json", "spec.json", "manifest.json", "data.csv",
                          "index_curves.svg", "heatmap_kmeans.svg", "profile_hier.svg"}) {
        CAPTURE(f);
        CHECK(std::filesystem::exists(out / f));
    }
    const auto report = json::parse(slurp(out / "report.json"));
    REQUIRE(report["internal"].size() == 2);
    for (const auto& row : report["internal"]) {
        CHECK(row["index"] == "silhouette");
        CHECK(row["k"] == 4);
        CHECK(row["value"].is_number());
        CHECK(row["seconds"].is_number());
        CHECK(std::filesystem::exists(row["label_file"].get<std::string>()));
    }
    CHECK(report["external"].size() == 4);
    CHECK(xmlcheck::well_formed(slurp(out / "index_curves.svg")));

    const auto svg = cli({"render", "--kind", "heatmap", "--run", out.string(), "--algorithm", "kmeans"});
    CHECK(svg.code == 0);
    CHECK(xmlcheck::well_formed(svg.out));
    CHECK(xmlcheck::count(svg.out, R"(class="cell")") == 400);
    const auto curves = cli({"render", "--kind", "index_curve", "--run", out.string()});
    CHECK(xmlcheck::count(curves.out, R"(<g class="series")") == 2);
    CHECK(cli({"render", "--kind", "profile", "--run", out.string(), "--algorithm", "fcm"}).code == 2);

    const auto csv = cli({"report", "--run", out.string(), "--format", "csv"});
    CHECK(csv.code == 0);
    CHECK(csv.out.rfind("table,algorithm", 0) == 0);
    CHECK(json::parse(cli({"report", "--run", out.string()}).out) == report);
}

TEST_CASE("no-timings reports are byte-identical across runs") {
    Workspace ws;
    REQUIRE(ws.run("a", {"--no-timings"}).code == 0);
    REQUIRE(ws.run("b", {"--no-timings", "--workers", "2"}).code == 0);
    const auto a = slurp(ws.dir / "a" / "report.json");
    CHECK(a == slurp(ws.dir / "b" / "report.json"));
    CHECK(a.find("seconds") == std::string::npos);
    CHECK(slurp(ws.dir / "a" / "report.csv") == slurp(ws.dir / "b" / "report.csv"));
}

TEST_CASE("bad input gives a diagnostic and a nonzero exit") {
    Workspace ws;
    spit(ws.config, R"({"algorithms": ["kmeans"], "k_min": 2, "k_max": 500, "internal_index": "db"})");
    auto r = ws.run("x");
    CHECK(r.code == 2);
    CHECK(r.err.find("k_max") != std::string::npos);

    spit(ws.config, R"({"algorithms": ["kmeans"], "internal_index": "ari"})");
    r = ws.run("x");
    CHECK(r.code == 2);
    CHECK(r.err.find("internal_index") != std::string::npos);

    spit(ws.config, "{oops");
    CHECK(ws.run("x").code == 2);

    spit(ws.config, R"({"algorithms": ["kmeans"], "internal_index": "db", "external_indices": ["ari"]})");
    r = cli({"run", "--config", ws.config.string(), "--data", ws.data.string(), "--out", (ws.dir / "x").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("true labels") != std::string::npos);

    CHECK(cli({"run", "--bogus"}).code != 0);
    CHECK(cli({"frobnicate"}).code != 0);
    CHECK(cli({}).code != 0);
    CHECK(cli({"report", "--run", (ws.dir / "missing").string()}).code != 0);
}

TEST_CASE("preprocess writes filtered csv") {
    Workspace ws;
    const auto r = cli({"preprocess", "--data", ws.data.string(), "--class-column", "4", "--top-n", "10", "--normalize"});
    REQUIRE(r.code == 0);
    const auto m = parse_matrix(r.out, 4);
    CHECK(m.rows() == 10);
    CHECK(m.cols() == 2);
    const auto file = ws.dir / "pre.csv";
    REQUIRE(cli({"preprocess", "--data", ws.data.string(), "--out", file.string()}).code == 0);
    CHECK(load_matrix(file).rows() == 200);
    CHECK(cli({"--help"}).code == 0);
}
