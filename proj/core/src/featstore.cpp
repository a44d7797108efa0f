#include "fieldtrace/featstore.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "fieldtrace/error.hpp"

namespace fieldtrace {
namespace {

template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) { put_le(out, std::bit_cast<std::uint32_t>(f)); }

void put_str(std::string& out, std::string_view s) {
  put_le(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Cursor {
 public:
  explicit Cursor(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  std::string get_str() {
    auto n = get<std::uint32_t>();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(Errc::MalformedRecord, "record body too short");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

constexpr std::size_t kFixedHeaderBytes = 24;

}  // namespace

std::string_view store_kind_name(StoreKind k) noexcept {
  return k == StoreKind::DenseHidden ? "dense_hidden" : "sparse_cett";
}

void validate_record(const StoreHeader& h, const FeatureRecord& r) {
  if (static_cast<int>(r.field) >= static_cast<int>(kFieldCount))
    throw Error(Errc::MalformedRecord, r.ref_id + ": field code out of range");
  if (r.label > 1) throw Error(Errc::MalformedRecord, r.ref_id + ": label must be 0 or 1");
  if (h.kind == StoreKind::DenseHidden) {
    if (r.layer < 0 || static_cast<std::uint32_t>(r.layer) >= h.n_layers)
      throw Error(Errc::MalformedRecord, r.ref_id + ": layer out of range");
    if (r.dense.size() != h.dim_per_layer)
      throw Error(Errc::MalformedRecord, r.ref_id + ": dense payload length != dim_per_layer");
    if (r.sparse.nnz() != 0)
      throw Error(Errc::MalformedRecord, r.ref_id + ": sparse payload in dense store");
  } else {
    if (r.layer != -1) throw Error(Errc::MalformedRecord, r.ref_id + ": sparse record layer must be -1");
    if (!r.dense.empty())
      throw Error(Errc::MalformedRecord, r.ref_id + ": dense payload in sparse store");
    if (r.sparse.index.size() != r.sparse.value.size())
      throw Error(Errc::MalformedRecord, r.ref_id + ": index/value length mismatch");
    const auto total = h.total_dim();
    for (std::size_t i = 0; i < r.sparse.index.size(); ++i) {
      if (r.sparse.index[i] >= total)
        throw Error(Errc::MalformedRecord, r.ref_id + ": sparse index out of range");
      if (i > 0 && r.sparse.index[i] <= r.sparse.index[i - 1])
        throw Error(Errc::MalformedRecord, r.ref_id + ": sparse indices not strictly increasing");
    }
  }
}

// --- writer -----------------------------------------------------------------

StoreWriter::StoreWriter(const std::filesystem::path& path, StoreHeader header)
    : out_(path, std::ios::binary | std::ios::trunc), header_(std::move(header)) {
  if (!out_) throw Error(Errc::Io, "cannot create " + path.string());
  if (header_.n_layers == 0 || header_.dim_per_layer == 0)
    throw Error(Errc::InvalidArgument, "store dimensions must be positive");
  if (header_.kind == StoreKind::SparseCett && header_.total_dim() > UINT32_MAX)
    throw Error(Errc::InvalidArgument, "sparse store dimension exceeds u32 index space");
  header_.version = kStoreVersion;
  std::string h;
  h.append(kStoreMagic, 4);
  put_le(h, header_.version);
  put_le(h, static_cast<std::uint8_t>(header_.kind));
  put_le(h, std::uint8_t{0});
  put_le(h, header_.n_layers);
  put_le(h, header_.dim_per_layer);
  put_le(h, std::uint64_t{0});  // patched on close
  put_str(h, header_.metadata);
  count_offset_ = 16;
  out_.write(h.data(), static_cast<std::streamsize>(h.size()));
}

StoreWriter::~StoreWriter() {
  try {
    close();
  } catch (...) {
  }
}

void StoreWriter::append(const FeatureRecord& rec) {
  if (closed_) throw Error(Errc::InvalidArgument, "append after close");
  validate_record(header_, rec);
  buf_.clear();
  put_str(buf_, rec.ref_id);
  put_le(buf_, static_cast<std::uint8_t>(rec.field));
  put_le(buf_, rec.label);
  put_le(buf_, rec.topic_id);
  put_le(buf_, rec.layer);
  if (header_.kind == StoreKind::DenseHidden) {
    put_le(buf_, static_cast<std::uint32_t>(rec.dense.size()));
    for (float v : rec.dense) put_f32(buf_, v);
  } else {
    put_le(buf_, static_cast<std::uint32_t>(rec.sparse.nnz()));
    for (std::size_t i = 0; i < rec.sparse.nnz(); ++i) {
      put_le(buf_, rec.sparse.index[i]);
      put_f32(buf_, rec.sparse.value[i]);
    }
  }
  std::string len;
  put_le(len, static_cast<std::uint32_t>(buf_.size()));
  out_.write(len.data(), 4);
  out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  if (!out_) throw Error(Errc::Io, "write failed");
  ++written_;
}

void StoreWriter::close() {
  if (closed_) return;
  closed_ = true;
  std::string c;
  put_le(c, written_);
  out_.seekp(count_offset_);
  out_.write(c.data(), 8);
  out_.close();
  if (!out_) throw Error(Errc::Io, "failed to finalize store");
}

// --- reader -----------------------------------------------------------------

StoreReader::StoreReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw Error(Errc::Io, "cannot open " + path.string());
  std::string fixed(kFixedHeaderBytes, '\0');
  in_.read(fixed.data(), static_cast<std::streamsize>(fixed.size()));
  if (in_.gcount() >= 4 && std::memcmp(fixed.data(), kStoreMagic, 4) != 0)
    throw Error(Errc::BadMagic, path.string() + " is not a CFS1 store");
  if (in_.gcount() != static_cast<std::streamsize>(kFixedHeaderBytes))
    throw Error(Errc::TruncatedRecord, "short header in " + path.string());
  Cursor c(std::string_view(fixed).substr(4));
  header_.version = c.get<std::uint16_t>();
  if (header_.version != kStoreVersion)
    throw Error(Errc::VersionMismatch,
                "store version " + std::to_string(header_.version) + ", expected " +
                    std::to_string(kStoreVersion));
  auto kind = c.get<std::uint8_t>();
  if (kind > 1) throw Error(Errc::MalformedRecord, "unknown store kind " + std::to_string(kind));
  header_.kind = static_cast<StoreKind>(kind);
  c.get<std::uint8_t>();
  header_.n_layers = c.get<std::uint32_t>();
  header_.dim_per_layer = c.get<std::uint32_t>();
  header_.record_count = c.get<std::uint64_t>();
  std::string len(4, '\0');
  in_.read(len.data(), 4);
  if (in_.gcount() != 4) throw Error(Errc::TruncatedRecord, "short header metadata");
  auto n = Cursor(len).get<std::uint32_t>();
  header_.metadata.resize(n);
  in_.read(header_.metadata.data(), n);
  if (static_cast<std::uint32_t>(in_.gcount()) != n)
    throw Error(Errc::TruncatedRecord, "short header metadata");
}

std::optional<FeatureRecord> StoreReader::next() {
  if (read_ == header_.record_count) {
    if (in_.peek() != std::char_traits<char>::eof())
      throw Error(Errc::TruncatedRecord,
                  "data after the declared " + std::to_string(header_.record_count) + " records");
    return std::nullopt;
  }
  std::string len(4, '\0');
  in_.read(len.data(), 4);
  if (in_.gcount() != 4)
    throw Error(Errc::TruncatedRecord, "header declares " + std::to_string(header_.record_count) +
                                           " records, file ends after " + std::to_string(read_));
  auto n = Cursor(len).get<std::uint32_t>();
  buf_.resize(n);
  in_.read(buf_.data(), n);
  if (static_cast<std::uint32_t>(in_.gcount()) != n)
    throw Error(Errc::TruncatedRecord, "record " + std::to_string(read_) + " is cut short");

  Cursor c(buf_);
  FeatureRecord r;
  r.ref_id = c.get_str();
  r.field = static_cast<FieldKind>(c.get<std::uint8_t>());
  r.label = c.get<std::uint8_t>();
  r.topic_id = c.get<std::int32_t>();
  r.layer = c.get<std::int32_t>();
  auto count = c.get<std::uint32_t>();
  if (header_.kind == StoreKind::DenseHidden) {
    r.dense.resize(count);
    for (auto& v : r.dense) v = c.get_f32();
  } else {
    r.sparse.index.resize(count);
    r.sparse.value.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      r.sparse.index[i] = c.get<std::uint32_t>();
      r.sparse.value[i] = c.get_f32();
    }
  }
  if (!c.done()) throw Error(Errc::MalformedRecord, "record " + std::to_string(read_) + " has trailing bytes");
  validate_record(header_, r);
  ++read_;
  return r;
}

void write_store(const std::filesystem::path& path, StoreHeader header,
                 const std::vector<FeatureRecord>& records) {
  StoreWriter w(path, std::move(header));
  for (const auto& r : records) w.append(r);
  w.close();
}

std::vector<FeatureRecord> read_store(const std::filesystem::path& path, StoreHeader* header_out) {
  StoreReader r(path);
  std::vector<FeatureRecord> out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(r.header().record_count, 1u << 20)));
  while (auto rec = r.next()) out.push_back(std::move(*rec));
  if (header_out) *header_out = r.header();
  return out;
}

}  // namespace fieldtrace
