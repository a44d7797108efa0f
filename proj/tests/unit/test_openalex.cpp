#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <chrono>

#include "fieldtrace/error.hpp"
#include "fieldtrace/hashing.hpp"
#include "fieldtrace/openalex.hpp"
#include "test_support.hpp"

using namespace fieldtrace;
using fieldtrace::testing::fixture_path;
using fieldtrace::testing::read_file;

namespace {

ClientConfig fast_config() {
  ClientConfig c;
  c.base_url = "https://api.test";
  c.max_requests_per_second = 0;
  c.backoff_base = std::chrono::milliseconds(1);
  return c;
}

std::string search_body(int n) {
  nlohmann::json results = nlohmann::json::array();
  for (int i = 0; i < n; ++i)
    results.push_back({{"id", "https://openalex.org/W90000" + std::to_string(i)},
                       {"title", "Result " + std::to_string(i)},
                       {"publication_year", 2000 + i}});
  return nlohmann::json{{"results", results}}.dump();
}

}  // namespace

TEST(ParseWork, ExtractsMatchingSubset) {
  const auto w = parse_work(nlohmann::json::parse(read_file(fixture_path("openalex/work_exact.json"))));
  EXPECT_EQ(w.openalex_id, "https://openalex.org/W9000000001");
  EXPECT_EQ(w.doi.value(), "10.5555/fixture.0001");
  EXPECT_EQ(w.title, "Sparse Probing of Layered Representations");
  EXPECT_EQ(w.author_family_names, (std::vector<std::string>{"okonkwo", "lindqvist", "sato"}));
  EXPECT_EQ(w.venue.value(), "Transactions of the Association for Computational Linguistics");
  EXPECT_EQ(w.year.value(), 2021);
}

TEST(ParseWork, HostVenueFallbackAndMissingFields) {
  const auto body = nlohmann::json::parse(read_file(fixture_path("openalex/search_unrelated.json")));
  const auto w = parse_work(body["results"][1]);
  EXPECT_FALSE(w.doi.has_value());
  EXPECT_EQ(w.venue.value(), "Discrete Applied Mathematics");
  EXPECT_THROW(parse_work(nlohmann::json{{"title", "no id"}}), Error);
}

TEST(Client, UrlsFollowTheApiShape) {
  auto c = fast_config();
  c.mailto = "ops@example.org";
  OpenAlexClient client(c, std::make_shared<FixtureTransport>());
  EXPECT_EQ(client.doi_url("10.1000/abc"), "https://api.test/works/doi:10.1000/abc?mailto=ops@example.org");
  EXPECT_EQ(client.search_url("a b&c", 10),
            "https://api.test/works?search=a%20b%26c&per-page=10&mailto=ops@example.org");
}

TEST(Client, DoiLookupFoundAndNotFound) {
  auto t = std::make_shared<FixtureTransport>();
  OpenAlexClient client(fast_config(), t);
  t->add(client.doi_url("10.5555/fixture.0001"), {200, read_file(fixture_path("openalex/work_exact.json"))});
  t->add(client.doi_url("10.5555/missing"), {404, "{}"});
  const auto w = client.lookup_by_doi("10.5555/fixture.0001");
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->doi.value(), "10.5555/fixture.0001");
  EXPECT_FALSE(client.lookup_by_doi("10.5555/missing").has_value());
}

TEST(Client, RetriesAfter429) {
  auto t = std::make_shared<FixtureTransport>();
  OpenAlexClient client(fast_config(), t);
  const auto url = client.doi_url("10.5555/fixture.0001");
  t->add(url, {429, ""});
  t->add(url, {200, read_file(fixture_path("openalex/work_exact.json"))});
  const auto w = client.lookup_by_doi("10.5555/fixture.0001");
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(client.counters().retries, 1u);
  EXPECT_EQ(t->requests().size(), 2u);
}

TEST(Client, PersistentRateLimitRaises) {
  auto t = std::make_shared<FixtureTransport>();
  auto cfg = fast_config();
  cfg.max_retries = 2;
  OpenAlexClient client(cfg, t);
  t->add(client.doi_url("10.5555/x"), {429, ""});
  try {
    client.lookup_by_doi("10.5555/x");
    FAIL() << "expected RateLimited";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RateLimited);
  }
  EXPECT_EQ(t->requests().size(), 3u);
}

TEST(Client, ServerErrorAndMalformedBody) {
  auto t = std::make_shared<FixtureTransport>();
  auto cfg = fast_config();
  cfg.max_retries = 0;
  OpenAlexClient client(cfg, t);
  t->add(client.doi_url("10.5555/err"), {403, "forbidden"});
  t->add(client.search_url("bad", 10), {200, read_file(fixture_path("openalex/malformed.json"))});
  t->add(client.doi_url("10.5555/junk"), {200, "<html>"});
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidArgument;
  };
  EXPECT_EQ(code_of([&] { client.lookup_by_doi("10.5555/err"); }), Errc::Transport);
  EXPECT_EQ(code_of([&] { client.search_by_title("bad"); }), Errc::MalformedResponse);
  EXPECT_EQ(code_of([&] { client.lookup_by_doi("10.5555/junk"); }), Errc::MalformedResponse);
}

TEST(Client, SearchKeepsOrderAndTruncates) {
  auto t = std::make_shared<FixtureTransport>();
  OpenAlexClient client(fast_config(), t);
  t->add(client.search_url("three", 10), {200, search_body(3)});
  t->add(client.search_url("none", 10), {200, search_body(0)});
  t->add(client.search_url("twelve", 10), {200, search_body(12)});
  const auto three = client.search_by_title("three");
  ASSERT_EQ(three.size(), 3u);
  EXPECT_EQ(three[0].title, "Result 0");
  EXPECT_EQ(three[2].title, "Result 2");
  EXPECT_TRUE(client.search_by_title("none").empty());
  EXPECT_EQ(client.search_by_title("twelve").size(), 10u);
}

TEST(Client, DiskCacheServesRepeatRequests) {
  fieldtrace::testing::TempDir dir("cache");
  auto t = std::make_shared<FixtureTransport>();
  auto cfg = fast_config();
  cfg.cache_dir = dir.path();
  const std::string body = read_file(fixture_path("openalex/work_exact.json"));
  {
    OpenAlexClient client(cfg, t);
    t->add(client.doi_url("10.5555/fixture.0001"), {200, body});
    ASSERT_TRUE(client.lookup_by_doi("10.5555/fixture.0001"));
    const auto url = client.doi_url("10.5555/fixture.0001");
    EXPECT_TRUE(std::filesystem::exists(dir / (sha256_hex(url) + ".json")));
  }
  OpenAlexClient again(cfg, t);
  ASSERT_TRUE(again.lookup_by_doi("10.5555/fixture.0001"));
  EXPECT_EQ(t->requests().size(), 1u);
  EXPECT_EQ(again.counters().cache_hits, 1u);
}

TEST(FixtureTransport, UnknownUrlWithoutDefaultThrows) {
  FixtureTransport t;
  EXPECT_THROW(t.get("https://nowhere"), Error);
  t.set_default({404, ""});
  EXPECT_EQ(t.get("https://nowhere").status, 404);
}

TEST(RateLimiter, SpacesConsecutiveRequests) {
  RateLimiter limiter(20.0);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 5; ++i) limiter.acquire();
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, std::chrono::milliseconds(190));
}

TEST(UrlEncode, ReservedCharacters) {
  EXPECT_EQ(url_encode("a b/c"), "a%20b%2Fc");
  EXPECT_EQ(url_encode("a b/c", "/"), "a%20b/c");
  EXPECT_EQ(url_encode("é"), "%C3%A9");
}
