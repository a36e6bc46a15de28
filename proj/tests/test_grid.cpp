#include "pdeopt/error.hpp"
#include "pdeopt/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace pdeopt;

namespace {

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    }
    catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("grid step on the unit interval with ten points")
{
    const GridSpec g(0.0, 1.0, 10, 0.0, 1.0, 10);
    CHECK(g.h_x() == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    const auto c = build_grid(g);
    REQUIRE(c.x.size() == 10);
    CHECK(c.x.front() == 0.0);
    CHECK(c.x.back() == 1.0);
    for (std::size_t i = 1; i < c.x.size(); ++i) CHECK(c.x[i] - c.x[i - 1] == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("grid step on the heat domain")
{
    const GridSpec g(-8.0, 8.0, 50, 0.0, 10.0, 50);
    CHECK(g.h_x() == doctest::Approx(16.0 / 49.0).epsilon(1e-15));
    CHECK(g.h_t() == doctest::Approx(10.0 / 49.0).epsilon(1e-15));
    CHECK(g.x(49) == 8.0);
    CHECK(g.t(49) == 10.0);
}

TEST_CASE("grid rejects invalid specs")
{
    CHECK(code_of([] { GridSpec(0.0, 1.0, 2, 0.0, 1.0, 10); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { GridSpec(0.0, 1.0, 10, 0.0, 1.0, 2); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { GridSpec(1.0, 1.0, 10, 0.0, 1.0, 10); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { GridSpec(0.0, 1.0, 10, 2.0, 1.0, 10); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { GridSpec(0.0, std::numeric_limits<double>::infinity(), 10, 0.0, 1.0, 10); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("row-major indexing puts x on axis 0")
{
    const GridSpec g(0.0, 1.0, 4, 0.0, 1.0, 3);
    CHECK(g.index(0, 0) == 0);
    CHECK(g.index(0, 2) == 2);
    CHECK(g.index(1, 0) == 3);
    CHECK(g.index(3, 2) == 11);
    CHECK(g.with_resolution(7, 5).same_domain(g));
    CHECK_FALSE(GridSpec(0.0, 2.0, 4, 0.0, 1.0, 3).same_domain(g));
}

TEST_CASE("field construction checks shape and finiteness")
{
    const GridSpec g(0.0, 1.0, 3, 0.0, 1.0, 3);
    CHECK(code_of([&] { Field(g, std::vector<double>(8, 0.0)); }) == ErrorCode::ShapeMismatch);
    std::vector<double> v(9, 0.0);
    v[4] = std::nan("");
    CHECK(code_of([&] { Field(g, v); }) == ErrorCode::NonFinite);
    v[4] = std::numeric_limits<double>::infinity();
    CHECK(code_of([&] { Field(g, v); }) == ErrorCode::NonFinite);
}

TEST_CASE("random fields are deterministic and in range")
{
    const GridSpec g(0.0, 1.0, 20, 0.0, 1.0, 30);
    const Field a = random_field(g, 7);
    const Field b = random_field(g, 7);
    CHECK(a == b);
    CHECK(a.min() >= 0.0);
    CHECK(a.max() <= 1.0);
    CHECK_FALSE(a == random_field(g, 8));

    const Field c = random_field(g, 3, -2.0, 5.0);
    CHECK(c.min() >= -2.0);
    CHECK(c.max() <= 5.0);
    // 600 uniform samples should spread over most of the range.
    CHECK(c.max() - c.min() > 6.0);

    CHECK(code_of([&] { random_field(g, 1, 0.5, 0.5); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { random_field(g, 1, 1.0, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("xoshiro256** first outputs are pinned")
{
    // splitmix64 seeding followed by xoshiro256**; recomputed by an independent
    // implementation and frozen so seeds keep their meaning across releases.
    Xoshiro256 a(0), b(0);
    for (int k = 0; k < 5; ++k) CHECK(a.next() == b.next());
    Xoshiro256 c(0);
    const std::uint64_t first = c.next();
    CHECK(first == 0x99ec5f36cb75f2b4ULL);
}

TEST_CASE("mae examples")
{
    const GridSpec g(0.0, 1.0, 4, 0.0, 1.0, 5);
    const Field f = random_field(g, 11);
    CHECK(mae(f, f) == 0.0);
    CHECK(mae(Field::constant(g, 0.0), Field::constant(g, 1.0)) == 1.0);

    const GridSpec tiny(0.0, 1.0, 3, 0.0, 1.0, 3);
    std::vector<double> a(9, 1.0), b(9, 1.0);
    // Four of nine points differ by 1.
    for (std::size_t k = 0; k < 4; ++k) a[k] = 0.0;
    CHECK(mae(Field(tiny, a), Field(tiny, b)) == doctest::Approx(4.0 / 9.0).epsilon(1e-15));

    CHECK(code_of([&] { return mae(f, Field::constant(tiny, 0.0)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("mae is a metric on random fields")
{
    const GridSpec g(0.0, 1.0, 6, 0.0, 1.0, 7);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Field a = random_field(g, s), b = random_field(g, s + 100), c = random_field(g, s + 200);
        CHECK(mae(a, b) == mae(b, a));
        CHECK(mae(a, b) >= 0.0);
        CHECK(mae(a, c) <= mae(a, b) + mae(b, c) + 1e-15);
    }
}

TEST_CASE("csv round trip is exact")
{
    const GridSpec g(-8.0, 8.0, 5, 0.0, 10.0, 4);
    const Field f = random_field(g, 5, -1e3, 1e-3);
    std::stringstream ss;
    write_csv(ss, f);
    const Field back = read_csv(ss, g);
    CHECK(back == f);

    std::stringstream bad("1,2,3\n4,5\n");
    CHECK_THROWS_AS((read_csv(bad, GridSpec(0.0, 1.0, 3, 0.0, 1.0, 3))), Error);
}

TEST_CASE("format_double gives shortest round-trip text")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
