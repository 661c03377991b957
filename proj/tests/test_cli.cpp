#include "termlim/cli.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace termlim;

namespace {

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string samples_dir() {
    const char* env = std::getenv("TERMLIM_SAMPLES");
    return env ? env : TERMLIM_SAMPLES_DIR;
}

std::string sample(const std::string& name) { return samples_dir() + "/" + name; }

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    return path;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

} // namespace

TEST_CASE("dist command") {
    REQUIRE(run({"dist", "f(a)", "f(b)"}).out == "1/2\n");
    REQUIRE(run({"dist", "f(a)", "f(a)"}).out == "0\n");
    REQUIRE(run({"dist", "f(a)", "g(a,b)"}).out == "1/1\n");
    REQUIRE(run({"dist", "f(a)", "f(b)"}).code == 0);

    RunResult bad = run({"dist", "f(", "a"});
    REQUIRE(bad.code == 2);
    REQUIRE(bad.err.find("error") != std::string::npos);

    REQUIRE(run({"dist", "f(a)", "f(a,b)"}).code == 2); // arity conflict in one session
}

TEST_CASE("model command") {
    auto path = write_temp("termlim_chain.lp", "p(f(X)) :- p(X).\np(f(a)).\n");

    RunResult r = run({"model", path.string(), "--depth", "4"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out == "p(f(a))\np(f(f(a)))\np(f(f(f(a))))\n");

    SECTION("step-bound exhaustion exits 3") {
        RunResult limited = run({"model", path.string(), "--depth", "8", "--steps", "2"});
        REQUIRE(limited.code == 3);
    }

    SECTION("facts-only programs print their facts") {
        auto facts = write_temp("termlim_facts.lp", "q(b).\np(a).\n");
        RunResult rf = run({"model", facts.string(), "--depth", "3"});
        REQUIRE(rf.code == 0);
        REQUIRE(rf.out == "p(a)\nq(b)\n");
    }

    SECTION("empty programs print nothing") {
        auto empty = write_temp("termlim_empty.lp", "% nothing here\n");
        RunResult re = run({"model", empty.string(), "--depth", "3"});
        REQUIRE(re.code == 0);
        REQUIRE(re.out.empty());
    }

    SECTION("missing files exit 2") {
        REQUIRE(run({"model", "/nonexistent/x.lp", "--depth", "3"}).code == 2);
    }
}

TEST_CASE("family limit command") {
    RunResult r = run({"family", "limit", sample("shifting_fact.lpf"), "--horizon", "16"});
    REQUIRE(r.code == 0);
    REQUIRE(first_line(r.out) == "p(f(X)) :- p(X).");
    REQUIRE(r.out.find("ConvergedUpTo(H=16)") != std::string::npos);

    SECTION("alternating families diverge") {
        RunResult d = run({"family", "limit", sample("parity_fact.lpf"), "--horizon", "12"});
        REQUIRE(d.code == 0);
        REQUIRE(d.out.find("Diverged") != std::string::npos);
    }

    SECTION("horizon below 4 is a usage error") {
        REQUIRE(run({"family", "limit", sample("shifting_fact.lpf"), "--horizon", "2"}).code == 2);
    }
}

TEST_CASE("family models command") {
    RunResult r = run({"family", "models", sample("parity.lpf"), "--horizon", "10", "--depth", "6",
                       "--precision", "4"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("RefutedAt") != std::string::npos);
    REQUIRE(r.out.find("rho=1/1") != std::string::npos);
    REQUIRE(r.out.find("% warning: body-subterm hypothesis") != std::string::npos);

    SECTION("per-index models and adjacent distances are listed") {
        RunResult c = run({"family", "models", sample("shifting_fact.lpf"), "--horizon", "4",
                           "--depth", "8", "--precision", "4"});
        REQUIRE(c.code == 0);
        REQUIRE(c.out.find("% k=1 (7 atoms)") != std::string::npos);
        REQUIRE(c.out.find("% rho(M_1,M_2) = 1/3") != std::string::npos);
        REQUIRE(c.out.find("% rho(M_3,M_4) = 1/5") != std::string::npos);
    }
}

TEST_CASE("family verify command") {
    RunResult r = run({"family", "verify", sample("shifting_fact.lpf"), "--depth", "8",
                       "--precision", "4", "--horizon", "6"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("hypothesis: ok") != std::string::npos);
    REQUIRE(r.out.find("[a] program limit: ConvergedUpTo(H=6)") != std::string::npos);
    REQUIRE(r.out.find("[b] model sequence: ConvergedUpTo(m=4, K=3)") != std::string::npos);
    REQUIRE(r.out.find("[c] trace: 1/3 1/4 1/5 1/6 1/7 1/8 -> ok") != std::string::npos);
    REQUIRE(r.out.find("[d] satisfaction: ok") != std::string::npos);
    REQUIRE(r.out.find("p(f(f(f(f(f(f(f(a))))))))") != std::string::npos);
    REQUIRE(r.out.find("result: PASS") != std::string::npos);

    SECTION("hypothesis failure exits 4") {
        RunResult h = run({"family", "verify", sample("parity.lpf"), "--depth", "6", "--precision",
                           "4", "--horizon", "6"});
        REQUIRE(h.code == 4);
        REQUIRE(h.out.find("hypothesis: FAILED") != std::string::npos);
    }

    SECTION("diverging families exit 5") {
        RunResult d = run({"family", "verify", sample("parity_fact.lpf"), "--depth", "6",
                           "--precision", "4", "--horizon", "6"});
        REQUIRE(d.code == 5);
        REQUIRE(d.out.find("result: FAILED") != std::string::npos);
    }

    SECTION("precision outside [1, depth-2] is a usage error") {
        REQUIRE(run({"family", "verify", sample("shifting_fact.lpf"), "--depth", "4", "--precision",
                     "4", "--horizon", "6"}).code == 2);
        REQUIRE(run({"family", "verify", sample("shifting_fact.lpf"), "--depth", "8", "--precision",
                     "0", "--horizon", "6"}).code == 2);
    }

    SECTION("csv export") {
        auto csv = std::filesystem::temp_directory_path() / "termlim_verify.csv";
        std::filesystem::remove(csv);
        RunResult c = run({"family", "verify", sample("shifting_fact.lpf"), "--depth", "8",
                           "--precision", "4", "--horizon", "6", "--csv", csv.string()});
        REQUIRE(c.code == 0);
        std::ifstream in(csv);
        std::string header;
        std::getline(in, header);
        REQUIRE(header == "k,rho_adjacent,rho_to_limit");
        int rows = 0;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        REQUIRE(rows == 6);
    }
}

TEST_CASE("fix-check command") {
    RunResult r = run({"fix-check"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("m=1 K=0 rho=1/2 equivalent") != std::string::npos);
    REQUIRE(r.out.find("m=32 K=31 rho=1/33 equivalent") != std::string::npos);
    REQUIRE(r.out.find("result: PASS") != std::string::npos);

    SECTION("built-in stream descriptor") {
        RunResult s = run({"fix-check", "--stream", "fix(g,b)", "--precision", "6"});
        REQUIRE(s.code == 0);
        REQUIRE(s.out.find("continuity: verified") != std::string::npos);
        REQUIRE(s.out.find("ConvergedUpTo(m=6") != std::string::npos);
    }

    SECTION("file stream descriptor") {
        auto path = write_temp("termlim_stream.txt",
                               "f(a)\nf(f(a))\nf(f(f(a)))\nf(f(f(f(a))))\n% tail repeats\n");
        RunResult s = run({"fix-check", "--stream", "file:" + path.string(), "--precision", "2",
                           "--horizon", "8"});
        REQUIRE(s.code == 0);
        REQUIRE(s.out.find("continuity: unverified") != std::string::npos);
        REQUIRE(s.out.find("ConvergedUpTo(m=2") != std::string::npos);
    }

    SECTION("family-atom stream descriptor") {
        RunResult s = run({"fix-check", "--stream", "family-atom:" + sample("shifting_fact.lpf"),
                           "--precision", "4", "--horizon", "6", "--depth", "8"});
        REQUIRE(s.code == 0);
        REQUIRE(s.out.find("ConvergedUpTo(m=4") != std::string::npos);
    }

    SECTION("unknown descriptors exit 2") {
        REQUIRE(run({"fix-check", "--stream", "bogus:nope"}).code == 2);
    }
}

TEST_CASE("exp command") {
    RunResult zero = run({"exp", "0", "--precision", "10"});
    REQUIRE(zero.code == 0);
    REQUIRE(first_line(zero.out) == "1/1");

    SECTION("millionth precision at 1") {
        RunResult r = run({"exp", "1", "--precision", "1000000"});
        REQUIRE(r.code == 0);
        Rational got = parse_rational(first_line(r.out));
        Rational oracle = 0;
        {
            BigInt fact = 1;
            for (std::uint64_t i = 0; i <= 30; ++i) {
                if (i > 1) fact *= i;
                oracle += Rational(1) / Rational(fact);
            }
        }
        Rational gap = got - oracle;
        if (gap < 0) gap = -gap;
        REQUIRE(gap < Rational(1, 1000000));
        REQUIRE(r.out.find("K=") != std::string::npos);
    }

    SECTION("half") {
        RunResult r = run({"exp", "1/2", "--precision", "1000"});
        REQUIRE(r.code == 0);
        Rational got = parse_rational(first_line(r.out));
        Rational oracle = exp_partial(30, Rational(1, 2));
        Rational gap = got - oracle;
        if (gap < 0) gap = -gap;
        REQUIRE(gap < Rational(1, 1000));
    }

    SECTION("bad literals exit 2") {
        REQUIRE(run({"exp", "one"}).code == 2);
    }
}

TEST_CASE("cli surface") {
    REQUIRE(run({}).code == 2);
    REQUIRE(run({"nope"}).code == 2);
    REQUIRE(run({"--help"}).code == 0);
    REQUIRE(run({"family"}).code == 2);
}

TEST_CASE("byte-identical reruns") {
    std::vector<std::string> args = {"family", "verify", sample("shifting_fact.lpf"),
                                     "--depth", "8", "--precision", "4", "--horizon", "6"};
    RunResult a = run(args);
    RunResult b = run(args);
    REQUIRE(a.out == b.out);
    REQUIRE(a.code == b.code);

    auto csv1 = std::filesystem::temp_directory_path() / "termlim_det1.csv";
    auto csv2 = std::filesystem::temp_directory_path() / "termlim_det2.csv";
    std::vector<std::string> base = {"family", "models", sample("shifting_fact.lpf"),
                                     "--horizon", "6", "--depth", "8", "--precision", "4"};
    std::vector<std::string> with1 = base, with2 = base;
    with1.insert(with1.end(), {"--csv", csv1.string()});
    with2.insert(with2.end(), {"--csv", csv2.string()});
    RunResult m1 = run(with1);
    RunResult m2 = run(with2);
    REQUIRE(m1.out == m2.out);
    std::ifstream f1(csv1), f2(csv2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    REQUIRE(s1.str() == s2.str());
    REQUIRE_FALSE(s1.str().empty());
}
