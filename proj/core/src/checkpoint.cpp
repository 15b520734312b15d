#include "nam/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "nam/error.hpp"

namespace nam {
namespace {

constexpr char magic[4] = {'N', 'A', 'M', 'K'};

template <class T>
void put_le(std::string& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
  public:
    explicit Reader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

    bool done() const { return pos_ == bytes_.size(); }
    std::size_t pos() const { return pos_; }

    template <class T>
    T le(const char* what) {
        need(sizeof(T), what);
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
        pos_ += sizeof(T);
        return v;
    }

    std::string text(std::size_t n, const char* what) {
        need(n, what);
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }

  private:
    void need(std::size_t n, const char* what) {
        if (bytes_.size() - pos_ < n) {
            throw DataError(std::string("checkpoint truncated reading ") + what + ": expected " + std::to_string(n) +
                                " bytes, " + std::to_string(bytes_.size() - pos_) + " left",
                            static_cast<std::int64_t>(pos_));
        }
    }

    std::vector<std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
    std::string out(magic, 4);
    put_le<std::uint32_t>(out, checkpoint_version);
    for (const auto& t : tensors) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
        out += t.name;
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.rank()));
        for (auto d : t.value.shape()) put_le<std::uint64_t>(out, d);
        for (double v : t.value.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write checkpoint '" + path.string() + "'");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("failed writing checkpoint '" + path.string() + "'");
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint '" + path.string() + "'");
    Reader r({std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()});

    if (r.text(4, "magic") != std::string(magic, 4)) throw DataError("not a NAMK checkpoint: bad magic", 0);
    if (const auto v = r.le<std::uint32_t>("version"); v != checkpoint_version) {
        throw DataError("unsupported checkpoint version " + std::to_string(v), 4);
    }

    std::vector<NamedTensor> out;
    while (!r.done()) {
        const auto name_len = r.le<std::uint32_t>("name length");
        auto name = r.text(name_len, "name");
        const auto rank = r.le<std::uint32_t>("rank");
        if (rank > 8) throw DataError("tensor '" + name + "' has implausible rank " + std::to_string(rank), r.pos());
        Shape shape(rank);
        std::size_t count = 1;
        for (auto& d : shape) {
            d = r.le<std::uint64_t>("dimension");
            if (d == 0 || d > (std::size_t{1} << 32)) {
                throw DataError("tensor '" + name + "' has invalid dimension", r.pos());
            }
            count *= d;
        }
        std::vector<double> values(count);
        for (auto& v : values) v = std::bit_cast<double>(r.le<std::uint64_t>("tensor data"));
        out.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
    }
    return out;
}

void save_network(const std::filesystem::path& path, Network& net) { write_checkpoint(path, net.state()); }

Network load_network(const std::filesystem::path& path) {
    const auto tensors = read_checkpoint(path);
    if (tensors.empty() || tensors.front().name != Network::spec_record_name) {
        throw DataError("checkpoint '" + path.string() + "' lacks the architecture record");
    }
    Network net(Network::decode_spec(tensors.front().value), 0);
    net.load_state(tensors);
    return net;
}

} // namespace nam
