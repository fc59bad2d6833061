#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mixsdp/core.hpp"

using namespace mixsdp;

namespace {

// Dense symmetrization reference: accumulate w into both (i,j) and (j,i),
// zero the diagonal. Checks build_cost on anything up to 8x8.
std::vector<std::vector<double>> dense_symmetrize(int n, const std::vector<Triple>& entries) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (const auto& t : entries) {
        if (t.row == t.col) continue;
        m[t.row][t.col] += t.value;
        m[t.col][t.row] += t.value;
    }
    return m;
}

double dense_objective(const std::vector<std::vector<double>>& m, const FactorMatrix& v) {
    double f = 0.0;
    const int n = static_cast<int>(m.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f += m[i][j] * v.column_dot(i, j);
    return f;
}

// Integer-search reference for ceil(sqrt(2n)) + 1, capped at n.
int rank_by_integer_search(int n) {
    int r = 1;
    while (static_cast<long long>(r) * r < 2LL * n) ++r;
    return std::min(n, r + 1);
}

FactorMatrix random_feasible(int n, int k, std::uint64_t seed) { return random_init(n, k, seed); }

} // namespace

TEST_CASE("build_cost stores a single symmetric edge") {
    const SparseCost c = build_cost(2, {{0, 1, 1.0}});
    REQUIRE(c.size() == 2);
    REQUIRE(c.nnz() == 2);
    REQUIRE(c.row(0).size() == 1);
    CHECK(c.row(0)[0].col == 1);
    CHECK(c.row(0)[0].value == 1.0);
    CHECK(c.row(1)[0].col == 0);
    CHECK(c.row(1)[0].value == 1.0);
    CHECK(c.row_one_norm(0) == 1.0);
    CHECK(c.row_one_norm(1) == 1.0);
}

TEST_CASE("build_cost drops diagonal entries and reports the count") {
    const SparseCost c = build_cost(2, {{0, 0, 5.0}, {0, 1, 2.0}});
    CHECK(c.dropped_diagonal() == 1);
    REQUIRE(c.nnz() == 2);
    CHECK(c.row(0)[0].value == 2.0);
    CHECK(c.row(1)[0].value == 2.0);
}

TEST_CASE("build_cost sums duplicates in either orientation") {
    const SparseCost c = build_cost(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 3.0}});
    CHECK(c.row(0)[0].value == 2.0);
    REQUIRE(c.row(1).size() == 2);
    CHECK(c.row(1)[0].value == 2.0);
    CHECK(c.row(1)[1].value == 3.0);
    CHECK(c.row(2)[0].value == 3.0);
    CHECK(c.row_one_norm(1) == 5.0);
}

TEST_CASE("build_cost matches the dense symmetrization reference") {
    std::mt19937_64 gen(42);
    std::uniform_int_distribution<int> idx(0, 7);
    std::uniform_real_distribution<double> weight(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Triple> entries;
        const int count = 1 + static_cast<int>(gen() % 20);
        for (int e = 0; e < count; ++e) entries.push_back({idx(gen), idx(gen), weight(gen)});
        const SparseCost c = build_cost(8, entries);
        const auto dense = dense_symmetrize(8, entries);
        for (int i = 0; i < 8; ++i) {
            double norm1 = 0.0;
            std::vector<double> row(8, 0.0);
            for (const auto& e : c.row(i)) row[e.col] = e.value;
            for (int j = 0; j < 8; ++j) {
                CHECK(row[j] == Catch::Approx(dense[i][j]).margin(1e-15));
                norm1 += std::abs(dense[i][j]);
            }
            CHECK(c.row_one_norm(i) == Catch::Approx(norm1).margin(1e-12));
        }
    }
}

TEST_CASE("build_cost rejects bad input") {
    CHECK_THROWS_AS(build_cost(2, {{0, 2, 1.0}}), input_error);
    CHECK_THROWS_AS(build_cost(2, {{-1, 0, 1.0}}), input_error);
    CHECK_THROWS_AS(build_cost(2, {{0, 1, std::nan("")}}), input_error);
    CHECK_THROWS_AS(build_cost(0, std::vector<Triple>{}), input_error);
}

TEST_CASE("export then rebuild round-trips exactly") {
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> idx(0, 11);
    std::uniform_real_distribution<double> weight(-5.0, 5.0);
    std::vector<Triple> entries;
    for (int e = 0; e < 40; ++e) entries.push_back({idx(gen), idx(gen), weight(gen)});
    const SparseCost a = build_cost(12, entries);
    const SparseCost b = build_cost(12, a.export_entries());
    REQUIRE(a.nnz() == b.nnz());
    for (int i = 0; i < 12; ++i) {
        REQUIRE(a.row(i).size() == b.row(i).size());
        for (std::size_t t = 0; t < a.row(i).size(); ++t) {
            CHECK(a.row(i)[t].col == b.row(i)[t].col);
            CHECK(a.row(i)[t].value == b.row(i)[t].value);
        }
        CHECK(a.row_one_norm(i) == b.row_one_norm(i));
    }
}

TEST_CASE("cost text format round-trips through parse") {
    const SparseCost a = build_cost(4, {{0, 1, 1.5}, {2, 3, -2.0}, {0, 3, 0.25}});
    const SparseCost b = parse_cost_text(format_cost_text(a));
    REQUIRE(b.size() == 4);
    REQUIRE(b.nnz() == a.nnz());
    for (int i = 0; i < 4; ++i)
        for (std::size_t t = 0; t < a.row(i).size(); ++t)
            CHECK(a.row(i)[t].value == b.row(i)[t].value);
}

TEST_CASE("cost text parser accepts comments and rejects malformed lines") {
    CHECK(parse_cost_text("# header comment\n2 1\n% mid comment\n1 2 1.0\n").nnz() == 2);
    CHECK_THROWS_AS(parse_cost_text("2 1\n1 2\n"), parse_error);
    CHECK_THROWS_AS(parse_cost_text("2 1\n1 3 1.0\n"), parse_error);
    CHECK_THROWS_AS(parse_cost_text("2 2\n1 2 1.0\n"), parse_error);
    CHECK_THROWS_AS(parse_cost_text("2 1\n1 2 1.0\n1 2 2.0\n"), parse_error);
    CHECK_THROWS_AS(parse_cost_text(""), parse_error);
    try {
        parse_cost_text("2 1\nbogus\n");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("objective on hand examples") {
    const SparseCost c = build_cost(2, {{0, 1, 1.0}});
    CHECK(objective(c, FactorMatrix::from_columns({{1, 0}, {0, 1}})) == Catch::Approx(0.0).margin(1e-15));
    CHECK(objective(c, FactorMatrix::from_columns({{1, 0}, {-1, 0}})) == Catch::Approx(-2.0));
    CHECK_THROWS_AS(objective(c, FactorMatrix(2, 3)), input_error);
}

TEST_CASE("objective matches the dense trace computation") {
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> idx(0, 5);
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Triple> entries;
        for (int e = 0; e < 10; ++e) entries.push_back({idx(gen), idx(gen), weight(gen)});
        const SparseCost c = build_cost(6, entries);
        const FactorMatrix v = random_feasible(6, 3, trial);
        const double dense = dense_objective(dense_symmetrize(6, entries), v);
        CHECK(objective(c, v) == Catch::Approx(dense).margin(1e-12));
    }
}

TEST_CASE("objective is invariant under orthogonal rotations of the columns") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const SparseCost c = build_cost(6, {{0, 1, 1.0}, {1, 2, -0.5}, {3, 4, 2.0}, {0, 5, 0.7}});
    for (int trial = 0; trial < 25; ++trial) {
        const int k = 4;
        const FactorMatrix v = random_feasible(6, k, 100 + trial);

        // random Householder reflection H = I - 2uu'
        std::vector<double> u(k);
        double un = 0.0;
        for (double& x : u) {
            x = unit(gen);
            un += x * x;
        }
        un = std::sqrt(un);
        for (double& x : u) x /= un;

        FactorMatrix rotated = v;
        for (int i = 0; i < 6; ++i) {
            auto col = rotated.column(i);
            double proj = 0.0;
            for (int t = 0; t < k; ++t) proj += u[t] * col[t];
            for (int t = 0; t < k; ++t) col[t] -= 2.0 * proj * u[t];
        }
        const double f0 = objective(c, v);
        const double f1 = objective(c, rotated);
        CHECK(std::abs(f1 - f0) <= 1e-9 * std::max(1.0, std::abs(f0)));
    }
}

TEST_CASE("objective ignores diagonal entries in the raw input") {
    const std::vector<Triple> base = {{0, 1, 1.0}, {1, 2, -0.5}};
    std::vector<Triple> with_diag = base;
    with_diag.push_back({0, 0, 9.0});
    with_diag.push_back({2, 2, -3.0});
    const FactorMatrix v = random_feasible(3, 2, 5);
    CHECK(objective(build_cost(3, base), v) == objective(build_cost(3, with_diag), v));
}

TEST_CASE("default_rank frozen values") {
    CHECK(default_rank(1) == 1);
    CHECK(default_rank(8) == 5);
    CHECK(default_rank(2000) == 65);
    CHECK_THROWS_AS(default_rank(0), input_error);
}

TEST_CASE("default_rank matches the integer-search reference") {
    for (int n = 1; n <= 3000; ++n) {
        const int r = default_rank(n);
        CHECK(r == rank_by_integer_search(n));
        if (r < n) // strictly above sqrt(2n) whenever feasible
            CHECK(static_cast<long long>(r) * r > 2LL * n);
    }
}

TEST_CASE("random_init is deterministic per seed") {
    const FactorMatrix a = random_init(3, 2, 7);
    const FactorMatrix b = random_init(3, 2, 7);
    const FactorMatrix c = random_init(3, 2, 8);
    bool differs = false;
    for (int i = 0; i < 3; ++i)
        for (int t = 0; t < 2; ++t) {
            CHECK(a.column(i)[t] == b.column(i)[t]);
            differs = differs || a.column(i)[t] != c.column(i)[t];
        }
    CHECK(differs);
}

TEST_CASE("random_init columns are unit vectors") {
    const FactorMatrix v = random_init(40, 6, 123);
    CHECK(v.max_norm_defect() <= 1e-12);
}

TEST_CASE("random_init 1-d columns are unbiased signs") {
    const FactorMatrix v = random_init(10000, 1, 0);
    double mean = 0.0;
    for (int i = 0; i < 10000; ++i) {
        CHECK(std::abs(std::abs(v.column(i)[0]) - 1.0) <= 1e-12);
        mean += v.column(i)[0];
    }
    mean /= 10000.0;
    CHECK(mean > -0.05);
    CHECK(mean < 0.05);
}

TEST_CASE("solve options validation") {
    SolveOptions o;
    CHECK_NOTHROW(validate(o));
    o.tol_rel = 0.0;
    CHECK_THROWS_AS(validate(o), input_error);
    o = SolveOptions{};
    o.max_sweeps = 0;
    CHECK_THROWS_AS(validate(o), input_error);
    o = SolveOptions{};
    o.step_size = StepSize::fixed(-1.0);
    CHECK_THROWS_AS(validate(o), input_error);
    o = SolveOptions{};
    o.trace_every = 0;
    CHECK_THROWS_AS(validate(o), input_error);
}
