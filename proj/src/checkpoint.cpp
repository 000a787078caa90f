#include "besim/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "besim/error.hpp"

namespace besim {

namespace {

constexpr char kMagic[] = "BESIM1";
constexpr std::size_t kMagicLen = 6;
constexpr std::uint8_t kLittle = 'L';
constexpr std::uint8_t kVersion = 1;
constexpr std::uint32_t kComponents = 9;
constexpr std::uint32_t kValueBytes = 8;
constexpr std::uint32_t kComponentMajor = 0;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void uint(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v), 8); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& data, const std::string& origin) : data_(data), origin_(origin) {}

  void need(std::size_t n, const char* what) {
    if (pos_ + n > data_.size())
      throw Error(ErrorKind::format, "checkpoint " + origin_ + ": truncated while reading " + what);
  }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t uint(int width, const char* what) {
    need(width, what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += width;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(uint(8, what)); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::string& data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

void CheckpointAux::set(const std::string& name, double value) {
  for (auto& [k, v] : entries)
    if (k == name) {
      v = value;
      return;
    }
  entries.emplace_back(name, value);
}

std::optional<double> CheckpointAux::get(const std::string& name) const {
  for (const auto& [k, v] : entries)
    if (k == name) return v;
  return std::nullopt;
}

std::string encode_checkpoint(const StateSnapshot& state, const CheckpointAux& aux) {
  const SpectralGrid& g = *state.grid();
  require_same_grid(g, *state.u.grid, "checkpoint");
  Writer w;
  w.bytes(kMagic, kMagicLen);
  w.u8(kLittle);
  w.u8(kVersion);
  for (int d : g.dims()) w.uint(static_cast<std::uint32_t>(d), 4);
  for (double b : g.box()) w.f64(b);
  const ModelParams& p = state.params;
  for (double v : {p.a, p.b, p.c, p.L, p.Gamma, p.mu, p.xi}) w.f64(v);
  w.f64(state.time);
  w.uint(kComponents, 4);
  w.uint(kValueBytes, 4);
  w.uint(kComponentMajor, 4);
  w.uint(aux.entries.size(), 4);
  for (const auto& [name, value] : aux.entries) {
    w.uint(name.size(), 2);
    w.bytes(name.data(), name.size());
    w.f64(value);
  }
  const std::uint64_t payload = static_cast<std::uint64_t>(g.points()) * kComponents * kValueBytes;
  w.uint(payload, 8);
  for (const auto& c : state.Q.comps)
    for (double v : c) w.f64(v);
  for (const auto& c : state.u.comps)
    for (double v : c) w.f64(v);
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes, const std::string& origin) {
  Reader r(bytes, origin);
  if (bytes.size() < kMagicLen || bytes.compare(0, kMagicLen, kMagic) != 0)
    throw Error(ErrorKind::format, "checkpoint " + origin + ": bad magic, expected \"BESIM1\"");
  r.bytes(kMagicLen, "magic");
  if (r.uint(1, "endianness tag") != kLittle)
    throw Error(ErrorKind::format, "checkpoint " + origin + ": unsupported endianness tag");
  const auto version = r.uint(1, "version");
  if (version != kVersion)
    throw Error(ErrorKind::format, "checkpoint " + origin + ": unsupported version " + std::to_string(version));
  std::array<int, 3> dims;
  for (int& d : dims) d = static_cast<int>(static_cast<std::int32_t>(r.uint(4, "dims")));
  std::array<double, 3> box;
  for (double& b : box) b = r.f64("box");
  ModelParams p;
  for (double* v : {&p.a, &p.b, &p.c, &p.L, &p.Gamma, &p.mu, &p.xi}) *v = r.f64("params");
  const double time = r.f64("time");
  if (r.uint(4, "layout") != kComponents || r.uint(4, "layout") != kValueBytes ||
      r.uint(4, "layout") != kComponentMajor)
    throw Error(ErrorKind::format, "checkpoint " + origin + ": unsupported payload layout");
  Checkpoint ck;
  const auto naux = r.uint(4, "aux count");
  for (std::uint64_t i = 0; i < naux; ++i) {
    const auto len = r.uint(2, "aux name length");
    std::string name = r.bytes(len, "aux name");
    ck.aux.entries.emplace_back(std::move(name), r.f64("aux value"));
  }
  const std::uint64_t payload = r.uint(8, "payload length");

  GridPtr grid;
  try {
    grid = make_grid(dims, box);
  } catch (const Error& e) {
    throw Error(ErrorKind::format, "checkpoint " + origin + ": invalid grid in header: " + e.what());
  }
  const std::uint64_t expected = static_cast<std::uint64_t>(grid->points()) * kComponents * kValueBytes;
  if (payload != expected || r.remaining() != expected) {
    std::ostringstream msg;
    msg << "checkpoint " << origin << ": payload length mismatch: expected " << expected
        << " bytes, header records " << payload << ", file holds " << r.remaining();
    throw Error(ErrorKind::format, msg.str());
  }
  ck.state = StateSnapshot::zeros(grid, p);
  ck.state.time = time;
  for (auto& c : ck.state.Q.comps)
    for (double& v : c) v = r.f64("payload");
  for (auto& c : ck.state.u.comps)
    for (double& v : c) v = r.f64("payload");
  return ck;
}

void write_checkpoint(const StateSnapshot& state, const std::filesystem::path& path,
                      const CheckpointAux& aux) {
  const std::string data = encode_checkpoint(state, aux);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open checkpoint for writing: " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::io, "failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint_full(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open checkpoint: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::io, "failed reading checkpoint: " + path.string());
  return decode_checkpoint(buf.str(), path.string());
}

StateSnapshot read_checkpoint(const std::filesystem::path& path) { return read_checkpoint_full(path).state; }

}  // namespace besim
