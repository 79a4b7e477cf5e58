#include "inlinerec/corpus.hpp"
#include "inlinerec/error.hpp"
#include "inlinerec/text.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <set>

using namespace inlinerec;

TEST_SUITE("corpus") {

TEST_CASE("manifest lines parse into role, level and path") {
    const auto m = parse_manifest("# comment\n\noriginal\tO0\tsrc/a.c\ndecompiled\tO2\tout/a.O2.c\r\n");
    REQUIRE(m.size() == 2);
    CHECK(m[0].role == FileRole::Original);
    CHECK(m[0].optimization == OptLevel::O0);
    CHECK(m[0].path == "src/a.c");
    CHECK(m[0].manifest_line == 3);
    CHECK(m[1].role == FileRole::Decompiled);
    CHECK(m[1].optimization == OptLevel::O2);
    CHECK(m[1].path == "out/a.O2.c");
}

TEST_CASE("manifest errors name the offending line") {
    CHECK_THROWS_WITH_AS(parse_manifest("original\tO0\ta.c\nassembly\tO0\tb.c\n"), doctest::Contains("line 2"), DataError);
    CHECK_THROWS_AS(parse_manifest("original\tO9\ta.c\n"), DataError);
    CHECK_THROWS_AS(parse_manifest("original\ta.c\n"), DataError);
}

TEST_CASE("every optimization level round-trips through its name") {
    for (auto o : {OptLevel::O0, OptLevel::O1, OptLevel::Os, OptLevel::O2, OptLevel::O3, OptLevel::Of, OptLevel::Unknown})
        CHECK(parse_opt_level(to_string(o)) == o);
    CHECK_FALSE(parse_opt_level("O4"));
}

TEST_CASE("loading a five-file tree reports the missing and duplicate entries") {
    testutil::TempDir dir;
    const std::vector<std::string> present = {"a.c", "b.c", "sub/c.c", "out/a.O2.c", "out/b.O2.c"};
    for (const auto& p : present) testutil::write(dir / p, "int " + p.substr(p.size() - 3, 1) + ";\n");

    const std::string manifest = "original\tO0\tb.c\n"
                                 "original\tO0\ta.c\n"
                                 "original\tO0\tsub/c.c\n"
                                 "decompiled\tO2\tout/a.O2.c\n"
                                 "decompiled\tO2\tout/b.O2.c\n"
                                 "original\tO0\ta.c\n"
                                 "decompiled\tO3\tout/gone.O3.c\n";
    const auto result = load_corpus(dir.path, parse_manifest(manifest));

    // oracle: an independent directory walk intersected with the manifest paths
    std::set<std::string> walked;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path))
        if (e.is_regular_file()) walked.insert(std::filesystem::relative(e.path(), dir.path).generic_string());
    std::vector<std::string> expected(walked.begin(), walked.end()); // all five are listed

    std::vector<std::string> got;
    for (const auto& f : result.files) got.push_back(f.path);
    CHECK(got == expected);

    REQUIRE(result.issues.size() == 2);
    CHECK(result.issues[0].kind == LoadIssue::Kind::Duplicate);
    CHECK(result.issues[0].path == "a.c");
    CHECK(result.issues[1].kind == LoadIssue::Kind::Missing);
    CHECK(result.issues[1].path == "out/gone.O3.c");

    for (const auto& f : result.files) {
        CHECK(f.language == (f.path.starts_with("out/") ? Language::PseudoC : Language::C));
        CHECK(f.optimization == (f.path.starts_with("out/") ? OptLevel::O2 : OptLevel::O0));
    }
}

TEST_CASE("source lines split on LF and CRLF") {
    const auto f = SourceFile::from_content("x.c", "a\r\nb\n\nc", Language::C);
    CHECK(f.lines == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(SourceFile::from_content("y.c", "a\n", Language::C).line_count() == 1);
}

TEST_CASE("target names are normalized and must be unique identifiers") {
    TargetFunctionSet t;
    t.add("  MemCpy ");
    CHECK(t.contains("memcpy"));
    CHECK(t.contains("MEMCPY"));
    CHECK_THROWS_AS(t.add("memcpy"), DataError);
    CHECK_THROWS_AS(t.add(""), DataError);
    CHECK_THROWS_AS(t.add("not a name"), DataError);

    const auto parsed = TargetFunctionSet::parse("# names\nstrcpy\t120\nEnterCriticalSection\t7\n");
    CHECK(parsed.names() == std::vector<std::string>{"entercriticalsection", "strcpy"});
    CHECK(parsed.frequency("strcpy") == 120);
    CHECK(TargetFunctionSet::parse(parsed.serialize()).names() == parsed.names());
    CHECK(TargetFunctionSet::parse(parsed.serialize()).frequency("entercriticalsection") == 7);
}

TEST_CASE("function ids keep file paths with separators intact") {
    const FunctionId id{"dir/a::b.c", "FUN_00401000", 3};
    CHECK(id.str() == "dir/a::b.c::FUN_00401000::3");
    CHECK(FunctionId::parse(id.str()) == id);
    CHECK_THROWS_AS(FunctionId::parse("nothing"), DataError);
    CHECK_THROWS_AS(FunctionId::parse("a.c::f::x"), DataError);
    CHECK(FunctionId{"a.c", "z", 0} < FunctionId{"a.c", "a", 1});
    CHECK(FunctionId{"a.c", "z", 9} < FunctionId{"b.c", "a", 0});
}

TEST_CASE("pseudo-C splits into function bodies") {
    const std::string src = "typedef int undefined4;\n"
                            "undefined4 DAT_00404000;\n"
                            "void FUN_00401000(int param_1);\n"
                            "\n"
                            "void FUN_00401000(int param_1)\n"
                            "\n"
                            "{\n"
                            "  if (param_1 == 0) {\n"
                            "    do {\n"
                            "      param_1 = param_1 + 1;\n"
                            "    } while (param_1 < 10);\n"
                            "  }\n"
                            "  return;\n"
                            "}\n"
                            "struct s { int a; };\n"
                            "int entry(char *s,\n"
                            "          int n) {\n"
                            "  char *p = \"}\"; /* } */\n"
                            "  return n;\n"
                            "}\n";
    const auto file = SourceFile::from_content("out/a.c", src, Language::PseudoC, OptLevel::O2);
    const auto fns = split_functions(file);
    REQUIRE(fns.size() == 2);

    CHECK(fns[0].id == FunctionId{"out/a.c", "FUN_00401000", 0});
    CHECK(fns[0].first_line == 4);
    CHECK(fns[0].line_count() == 10);
    CHECK(fns[0].lines.front() == "void FUN_00401000(int param_1)");
    CHECK(fns[0].lines.back() == "}");
    CHECK_FALSE(fns[0].truncated);

    CHECK(fns[1].id == FunctionId{"out/a.c", "entry", 1});
    CHECK(fns[1].first_line == 15);
    CHECK(fns[1].line_count() == 5);

    // the bodies are verbatim slices of the file
    for (const auto& fn : fns)
        for (std::size_t i = 0; i < fn.line_count(); ++i) CHECK(fn.lines[i] == file.lines[fn.first_line + i]);
    CHECK(src.substr(fns[0].byte_begin, fns[0].byte_end - fns[0].byte_begin).starts_with("void FUN_00401000(int"));
}

TEST_CASE("an unterminated body runs to end of file and is flagged") {
    const auto file = SourceFile::from_content("t.c", "void f(void)\n{\n  if (x) {\n    y();\n", Language::PseudoC);
    const auto fns = split_functions(file);
    REQUIRE(fns.size() == 1);
    CHECK(fns[0].truncated);
    CHECK(fns[0].line_count() == 4);
}

TEST_CASE("splitting requires pseudo-C input") {
    CHECK_THROWS_AS(split_functions(SourceFile::from_content("a.c", "int f(){}\n", Language::C)), UsageError);
    CHECK(split_functions(SourceFile::from_content("e.c", "", Language::PseudoC)).empty());
}

TEST_CASE("bodies from random brace-balanced files reassemble the function text") {
    std::mt19937_64 g(17);
    for (int round = 0; round < 50; ++round) {
        std::string src;
        std::vector<std::size_t> sizes;
        const int nfn = 1 + static_cast<int>(g() % 6);
        for (int f = 0; f < nfn; ++f) {
            src += "int g" + std::to_string(f) + ";\n";
            src += "long FUN_" + std::to_string(f) + "(long a)\n{\n";
            std::size_t lines = 3;
            int depth = 0;
            for (int k = static_cast<int>(g() % 12); k > 0; --k) {
                if (g() % 4 == 0) {
                    src += "  if (a) {\n";
                    ++depth;
                } else if (depth > 0 && g() % 3 == 0) {
                    src += "  }\n";
                    --depth;
                } else {
                    src += "  a = a + 1;\n";
                }
                ++lines;
            }
            for (; depth > 0; --depth, ++lines) src += "  }\n";
            src += "}\n";
            sizes.push_back(lines);
        }
        const auto fns = split_functions(SourceFile::from_content("r.c", src, Language::PseudoC));
        REQUIRE(fns.size() == sizes.size());
        for (std::size_t i = 0; i < fns.size(); ++i) {
            CHECK(fns[i].line_count() == sizes[i]);
            CHECK(fns[i].id.ordinal == i);
        }
    }
}

} // TEST_SUITE
