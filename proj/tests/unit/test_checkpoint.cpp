#include <fstream>
#include <iterator>

#include "doctest.h"
#include "helpers.hpp"
#include "nam/checkpoint.hpp"
#include "nam/error.hpp"

using namespace nam;

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

} // namespace

TEST_CASE("checkpoint byte layout") {
    const auto dir = test::temp_dir("ckpt_layout");
    write_checkpoint(dir / "a.namk", {{"w", Tensor({2}, {1.0, -2.0})}});
    const auto b = read_all(dir / "a.namk");
    const std::vector<std::uint8_t> head{'N', 'A', 'M', 'K', 1, 0, 0, 0, 1, 0, 0, 0, 'w', 1, 0, 0, 0,
                                         2, 0, 0, 0, 0, 0, 0, 0};
    REQUIRE(b.size() == head.size() + 16);
    CHECK(std::equal(head.begin(), head.end(), b.begin()));
    // 1.0 as a little-endian IEEE double.
    const std::vector<std::uint8_t> one{0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
    CHECK(std::equal(one.begin(), one.end(), b.begin() + static_cast<std::ptrdiff_t>(head.size())));
    const auto back = read_checkpoint(dir / "a.namk");
    REQUIRE(back.size() == 1);
    CHECK(back[0].name == "w");
    CHECK(back[0].value == Tensor({2}, {1.0, -2.0}));
}

TEST_CASE("network save and load reproduce every tensor bitwise") {
    const auto dir = test::temp_dir("ckpt_net");
    std::mt19937_64 rng(81);
    Network net(desk_scale_cnn(AttentionKind::nam, {4, 6}, 1, 8, 8, 10), 3);
    for (auto* p : net.parameters()) p->value = test::random_tensor(p->value.shape(), rng);
    save_network(dir / "m.namk", net);
    Network back = load_network(dir / "m.namk");
    CHECK(back.spec() == net.spec());
    const auto a = net.state(), b = back.state();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].name == b[i].name);
        CHECK(a[i].value == b[i].value);
    }
    const Tensor x = test::random_tensor({2, 1, 8, 8}, rng);
    Tape t1, t2;
    ForwardContext c1(t1, Mode::eval), c2(t2, Mode::eval);
    CHECK(net.forward(c1, t1.constant(x)).value() == back.forward(c2, t2.constant(x)).value());
}

TEST_CASE("corrupted checkpoints are rejected") {
    const auto dir = test::temp_dir("ckpt_bad");
    Network net(desk_scale_cnn(AttentionKind::nam, {4}, 1, 8, 8, 10), 3);
    save_network(dir / "m.namk", net);
    auto bytes = read_all(dir / "m.namk");

    auto bad = bytes;
    bad[0] = 'X';
    write_all(dir / "magic.namk", bad);
    CHECK_THROWS_AS(read_checkpoint(dir / "magic.namk"), DataError);

    bad = bytes;
    bad[4] = 2;
    write_all(dir / "version.namk", bad);
    CHECK_THROWS_AS(read_checkpoint(dir / "version.namk"), DataError);

    bad.assign(bytes.begin(), bytes.end() - 3);
    write_all(dir / "trunc.namk", bad);
    try {
        read_checkpoint(dir / "trunc.namk");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("truncated") != std::string::npos);
        CHECK(e.offset() > 0);
    }

    write_checkpoint(dir / "noarch.namk", {{"w", Tensor({1}, {1.0})}});
    CHECK_THROWS_AS(load_network(dir / "noarch.namk"), DataError);
    CHECK_THROWS_AS(read_checkpoint(dir / "missing.namk"), DataError);
}
