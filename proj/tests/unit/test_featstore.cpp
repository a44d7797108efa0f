#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "fieldtrace/error.hpp"
#include "fieldtrace/featstore.hpp"
#include "test_support.hpp"

using namespace fieldtrace;
using fieldtrace::testing::TempDir;

namespace {

std::vector<FeatureRecord> sparse_records(std::size_t n, std::uint32_t total, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> idx(0, total - 1);
  std::uniform_real_distribution<float> val(0.0f, 3.0f);
  std::vector<FeatureRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRecord r;
    r.ref_id = "ref-" + std::to_string(i) + (i % 7 == 0 ? "-模型" : "");
    r.field = kAllFields[i % kFieldCount];
    r.label = static_cast<std::uint8_t>(i % 2);
    r.topic_id = static_cast<std::int32_t>(i % 13);
    std::set<std::uint32_t> s;
    while (s.size() < 1 + i % 30) s.insert(idx(rng));
    for (auto k : s) {
      r.sparse.index.push_back(k);
      r.sparse.value.push_back(val(rng));
    }
    out.push_back(std::move(r));
  }
  return out;
}

StoreHeader sparse_header() {
  StoreHeader h;
  h.kind = StoreKind::SparseCett;
  h.n_layers = 4;
  h.dim_per_layer = 100;
  h.metadata = R"({"source":"unit"})";
  return h;
}

Errc code_of_read(const std::filesystem::path& p) {
  try {
    read_store(p);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;
}

void patch(const std::filesystem::path& p, std::streamoff at, const std::string& bytes) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(at);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST(FeatStore, SparseRoundTrip) {
  TempDir dir("store");
  const auto recs = sparse_records(100, 400, 1);
  write_store(dir / "s.cfs", sparse_header(), recs);
  StoreHeader h;
  const auto back = read_store(dir / "s.cfs", &h);
  EXPECT_EQ(back, recs);
  EXPECT_EQ(h.record_count, 100u);
  EXPECT_EQ(h.metadata, R"({"source":"unit"})");
  EXPECT_EQ(h.total_dim(), 400u);
}

TEST(FeatStore, DenseRoundTripAndByteStability) {
  TempDir dir("store");
  StoreHeader h;
  h.kind = StoreKind::DenseHidden;
  h.n_layers = 3;
  h.dim_per_layer = 8;
  std::vector<FeatureRecord> recs;
  std::mt19937_64 rng(5);
  std::normal_distribution<float> g;
  for (int i = 0; i < 30; ++i) {
    FeatureRecord r;
    r.ref_id = "d" + std::to_string(i);
    r.field = FieldKind::Venue;
    r.label = i & 1;
    r.layer = i % 3;
    for (int k = 0; k < 8; ++k) r.dense.push_back(g(rng));
    recs.push_back(r);
  }
  write_store(dir / "a.cfs", h, recs);
  write_store(dir / "b.cfs", h, recs);
  EXPECT_EQ(read_store(dir / "a.cfs"), recs);
  EXPECT_EQ(fieldtrace::testing::read_file(dir / "a.cfs"), fieldtrace::testing::read_file(dir / "b.cfs"));
}

TEST(FeatStore, HeaderLayoutIsLittleEndian) {
  TempDir dir("store");
  write_store(dir / "s.cfs", sparse_header(), sparse_records(3, 400, 2));
  const auto bytes = fieldtrace::testing::read_file(dir / "s.cfs");
  ASSERT_GE(bytes.size(), 24u);
  EXPECT_EQ(bytes.substr(0, 4), "CFS1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 1);  // SparseCett
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 4);  // n_layers
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 100);
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 3);  // record_count
}

TEST(FeatStore, CorruptMagic) {
  TempDir dir("store");
  write_store(dir / "s.cfs", sparse_header(), sparse_records(5, 400, 3));
  patch(dir / "s.cfs", 0, "XFS1");
  EXPECT_EQ(code_of_read(dir / "s.cfs"), Errc::BadMagic);
}

TEST(FeatStore, WrongVersion) {
  TempDir dir("store");
  write_store(dir / "s.cfs", sparse_header(), sparse_records(5, 400, 3));
  patch(dir / "s.cfs", 4, std::string("\x02\x00", 2));
  EXPECT_EQ(code_of_read(dir / "s.cfs"), Errc::VersionMismatch);
}

TEST(FeatStore, RecordCountMismatch) {
  TempDir dir("store");
  write_store(dir / "s.cfs", sparse_header(), sparse_records(5, 400, 3));
  patch(dir / "s.cfs", 16, std::string("\x06", 1));
  EXPECT_EQ(code_of_read(dir / "s.cfs"), Errc::TruncatedRecord);
  patch(dir / "s.cfs", 16, std::string("\x04", 1));
  EXPECT_EQ(code_of_read(dir / "s.cfs"), Errc::TruncatedRecord);
}

TEST(FeatStore, TruncatedFile) {
  TempDir dir("store");
  write_store(dir / "s.cfs", sparse_header(), sparse_records(5, 400, 3));
  const auto bytes = fieldtrace::testing::read_file(dir / "s.cfs");
  {
    std::ofstream out(dir / "s.cfs", std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 3));
  }
  EXPECT_EQ(code_of_read(dir / "s.cfs"), Errc::TruncatedRecord);
}

TEST(FeatStore, RecordValidation) {
  const auto h = sparse_header();
  FeatureRecord r;
  r.ref_id = "x";
  r.sparse.index = {5, 3};
  r.sparse.value = {1, 1};
  EXPECT_THROW(validate_record(h, r), Error);
  r.sparse.index = {5, 400};
  EXPECT_THROW(validate_record(h, r), Error);
  r.sparse.index = {5, 399};
  EXPECT_NO_THROW(validate_record(h, r));
  r.label = 2;
  EXPECT_THROW(validate_record(h, r), Error);
}

TEST(FeatStore, StreamingWriterPatchesCount) {
  TempDir dir("store");
  const auto recs = sparse_records(20, 400, 4);
  {
    StoreWriter w(dir / "s.cfs", sparse_header());
    for (const auto& r : recs) w.append(r);
    EXPECT_EQ(w.written(), 20u);
  }
  StoreReader reader(dir / "s.cfs");
  EXPECT_EQ(reader.header().record_count, 20u);
  std::size_t n = 0;
  while (auto r = reader.next()) EXPECT_EQ(*r, recs[n++]);
  EXPECT_EQ(n, 20u);
}

TEST(FeatStore, NeuronIdFlattening) {
  EXPECT_EQ(flat_index({2, 7}, 27648), 2u * 27648 + 7);
  EXPECT_EQ(unflatten(2u * 27648 + 7, 27648), (NeuronId{2, 7}));
  StoreHeader h;
  h.n_layers = 64;
  h.dim_per_layer = 27648;
  EXPECT_EQ(h.total_dim(), 1769472u);
}
