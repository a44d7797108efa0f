#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fieldtrace/refmodel.hpp"

// CFS1 feature store. All integers little-endian, values IEEE-754 f32.
//
//   header:
//     magic           4 bytes  "CFS1"
//     version         u16      (1)
//     kind            u8       0 = DenseHidden, 1 = SparseCett
//     reserved        u8       0
//     n_layers        u32
//     dim_per_layer   u32
//     record_count    u64
//     metadata        u32 length + UTF-8 bytes (JSON object, may be empty)
//   record (repeated record_count times):
//     body_length     u32      bytes that follow, excluding this field
//     ref_id          u32 length + UTF-8 bytes
//     field           u8       FieldKind code 0..4
//     label           u8       0 = correct, 1 = hallucinated
//     topic_id        i32
//     layer           i32      -1 for SparseCett
//     payload
//       DenseHidden:  u32 n (= dim_per_layer), n x f32
//       SparseCett:   u32 nnz, nnz x (u32 flat_index, f32 value),
//                     flat_index = layer * dim_per_layer + neuron, strictly increasing
namespace fieldtrace {

inline constexpr char kStoreMagic[4] = {'C', 'F', 'S', '1'};
inline constexpr std::uint16_t kStoreVersion = 1;

enum class StoreKind : std::uint8_t { DenseHidden = 0, SparseCett = 1 };
std::string_view store_kind_name(StoreKind k) noexcept;

struct StoreHeader {
  std::uint16_t version = kStoreVersion;
  StoreKind kind = StoreKind::SparseCett;
  std::uint32_t n_layers = 0;
  std::uint32_t dim_per_layer = 0;
  std::uint64_t record_count = 0;
  std::string metadata;  // JSON text

  std::uint64_t total_dim() const {
    return kind == StoreKind::SparseCett ? std::uint64_t{n_layers} * dim_per_layer
                                         : std::uint64_t{dim_per_layer};
  }
};

/// Sparse vector with strictly increasing indices.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<float> value;

  std::size_t nnz() const { return index.size(); }
  bool operator==(const SparseVector&) const = default;
};

struct FeatureRecord {
  std::string ref_id;
  FieldKind field = FieldKind::Title;
  std::uint8_t label = 0;
  std::int32_t topic_id = 0;
  std::int32_t layer = -1;
  std::vector<float> dense;  // DenseHidden
  SparseVector sparse;       // SparseCett

  bool operator==(const FeatureRecord&) const = default;
};

struct NeuronId {
  std::uint32_t layer = 0;
  std::uint32_t neuron = 0;
  auto operator<=>(const NeuronId&) const = default;
};

inline std::uint32_t flat_index(NeuronId n, std::uint32_t dim_per_layer) {
  return n.layer * dim_per_layer + n.neuron;
}
inline NeuronId unflatten(std::uint32_t flat, std::uint32_t dim_per_layer) {
  return {flat / dim_per_layer, flat % dim_per_layer};
}

/// Throws Error(MalformedRecord) when a record violates the header.
void validate_record(const StoreHeader& header, const FeatureRecord& rec);

/// Streaming writer. record_count is patched into the header on close().
class StoreWriter {
 public:
  StoreWriter(const std::filesystem::path& path, StoreHeader header);
  ~StoreWriter();
  StoreWriter(const StoreWriter&) = delete;
  StoreWriter& operator=(const StoreWriter&) = delete;

  void append(const FeatureRecord& rec);
  void close();
  std::uint64_t written() const { return written_; }

 private:
  std::ofstream out_;
  StoreHeader header_;
  std::uint64_t written_ = 0;
  std::streampos count_offset_{};
  bool closed_ = false;
  std::string buf_;
};

/// Streaming reader; validates the header on open and each record on read.
/// Throws BadMagic, VersionMismatch, TruncatedRecord, MalformedRecord.
class StoreReader {
 public:
  explicit StoreReader(const std::filesystem::path& path);

  const StoreHeader& header() const { return header_; }
  /// Next record, or nullopt after exactly record_count records. Trailing
  /// bytes or a short file raise TruncatedRecord.
  std::optional<FeatureRecord> next();

 private:
  std::ifstream in_;
  StoreHeader header_;
  std::uint64_t read_ = 0;
  std::string buf_;
};

void write_store(const std::filesystem::path& path, StoreHeader header,
                 const std::vector<FeatureRecord>& records);
std::vector<FeatureRecord> read_store(const std::filesystem::path& path,
                                      StoreHeader* header_out = nullptr);

}  // namespace fieldtrace
