#include "lift5/swrl_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "lift5/error.hpp"

namespace lift5 {

static_assert(std::endian::native == std::endian::little, "SWRL1 I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'W', 'R', 'L', '1', '\0', '\0', '\0'};
constexpr std::size_t kNameLen = 16;
constexpr std::size_t kHeaderLen = 8 + 3 * 4 + 3 * 8;

template <class T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <class T>
T get_at(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) fail(ErrorKind::Truncated, "SWRL1 payload truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

const ScalarFieldRZ& FieldBundle::get(const std::string& name) const {
  for (const auto& [n, f] : fields)
    if (n == name) return f;
  fail(ErrorKind::InvalidArgument, "no field named '" + name + "'");
}

bool FieldBundle::has(const std::string& name) const {
  for (const auto& [n, f] : fields)
    if (n == name) return true;
  return false;
}

std::vector<unsigned char> encode_swrl(const FieldBundle& b) {
  require(b.grid != nullptr, ErrorKind::InvalidArgument, "bundle without grid");
  for (const auto& [name, f] : b.fields) {
    require(name.size() <= kNameLen, ErrorKind::InvalidArgument, "field name longer than 16 bytes: " + name);
    require(f.grid() && f.grid()->same_as(*b.grid), ErrorKind::GridMismatch, "field '" + name + "' not on the bundle grid");
  }
  const auto& g = *b.grid;
  std::vector<unsigned char> out(8);
  std::memcpy(out.data(), kMagic, 8);
  out.reserve(kHeaderLen + b.fields.size() * (kNameLen + g.size() * 8));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nr()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nz()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(b.fields.size()));
  put<double>(out, g.r_max());
  put<double>(out, g.z_half());
  put<double>(out, b.time);
  for (const auto& [name, f] : b.fields) {
    char nm[kNameLen] = {};
    std::memcpy(nm, name.data(), name.size());
    out.insert(out.end(), nm, nm + kNameLen);
    const auto* p = reinterpret_cast<const unsigned char*>(f.data());
    out.insert(out.end(), p, p + g.size() * sizeof(double));
  }
  return out;
}

FieldBundle decode_swrl(const std::vector<unsigned char>& in) {
  if (in.size() < 8) fail(ErrorKind::Truncated, "SWRL1 header truncated");
  if (std::memcmp(in.data(), kMagic, 8) != 0) fail(ErrorKind::Format, "not a SWRL1 file (bad magic)");
  std::size_t pos = 8;
  const auto nr = get_at<std::uint32_t>(in, pos);
  const auto nz = get_at<std::uint32_t>(in, pos);
  const auto count = get_at<std::uint32_t>(in, pos);
  const double r_max = get_at<double>(in, pos);
  const double z_half = get_at<double>(in, pos);
  FieldBundle b;
  b.time = get_at<double>(in, pos);
  try {
    b.grid = HalfPlaneGrid::create(static_cast<int>(nr), static_cast<int>(nz), r_max, z_half);
  } catch (const Error& e) {
    fail(ErrorKind::Format, std::string("SWRL1 header describes an invalid grid: ") + e.what());
  }
  const std::size_t payload = b.grid->size() * sizeof(double);
  for (std::uint32_t k = 0; k < count; ++k) {
    if (pos + kNameLen + payload > in.size()) fail(ErrorKind::Truncated, "SWRL1 payload truncated");
    std::string name(reinterpret_cast<const char*>(in.data() + pos), kNameLen);
    name.resize(std::strlen(name.c_str()));
    pos += kNameLen;
    std::vector<double> v(b.grid->size());
    std::memcpy(v.data(), in.data() + pos, payload);
    pos += payload;
    b.fields.emplace_back(name, ScalarFieldRZ(b.grid, std::move(v), role_from_name(name)));
  }
  if (pos != in.size()) fail(ErrorKind::Format, "trailing bytes after SWRL1 payload");
  return b;
}

void write_swrl(const std::string& path, const FieldBundle& bundle) {
  const auto bytes = encode_swrl(bundle);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::Io, "cannot open " + tmp + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) fail(ErrorKind::Io, "write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot rename " + tmp + " to " + path + ": " + ec.message());
}

FieldBundle read_swrl(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Io, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_swrl(bytes);
}

FieldBundle read_swrl(const std::string& path, const HalfPlaneGrid& expected) {
  FieldBundle b = read_swrl(path);
  require(b.grid->same_as(expected), ErrorKind::GridMismatch, "SWRL1 grid does not match the expected grid");
  return b;
}

}  // namespace lift5
