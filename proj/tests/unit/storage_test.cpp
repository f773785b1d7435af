// Copyright 2026 The dataprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <thread>

#include "dataprep/digest.hpp"
#include "dataprep/storage.hpp"
#include "testing.hpp"

namespace dataprep {
namespace {

using testing::read_file;
using testing::rows;
using testing::TempDir;
using testing::write_file;

Dataset three_texts() { return rows(Json::parse(R"([{"text":"a"},{"text":"b"},{"text":"c"}])")); }

TEST(Dataset, AbsentCellsReadAsNull) {
  Dataset d = rows(Json::parse(R"([{"a":1},{"b":"x"}])"));
  ASSERT_EQ(d.columns(), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(d.at(0, "b").is_null());
  EXPECT_TRUE(d.at(1, "a").is_null());
  EXPECT_EQ(d.at(1, "b").as_text(), "x");
}

TEST(Dataset, MissingColumnNamesAvailableColumns) {
  Dataset d = three_texts();
  try {
    d.at(0, "score");
    FAIL();
  } catch (const MissingColumnError& e) {
    EXPECT_EQ(e.column(), "score");
    EXPECT_EQ(e.available(), std::vector<std::string>{"text"});
  }
}

TEST(Dataset, KindsFollowPayload) {
  EXPECT_EQ(FieldValue::text("x").kind(), Kind::kText);
  EXPECT_EQ(FieldValue::integer(3).kind(), Kind::kNumber);
  EXPECT_EQ(FieldValue::boolean(true).kind(), Kind::kBoolean);
  EXPECT_EQ(FieldValue(Json::array({1, 2})).kind(), Kind::kSequence);
  EXPECT_EQ(FieldValue(Json::object()).kind(), Kind::kObject);
  EXPECT_EQ(FieldValue().kind(), Kind::kNull);
  EXPECT_ERRC(FieldValue::number(1).as_text(), Errc::kKindMismatch);
}

TEST(Codecs, JsonlThreeLines) {
  Dataset d = parse_jsonl("{\"text\":\"a\"}\n{\"text\":\"b\"}\n{\"text\":\"c\"}\n");
  EXPECT_EQ(d.row_count(), 3u);
  EXPECT_EQ(d.columns(), std::vector<std::string>{"text"});
}

TEST(Codecs, MalformedJsonlReportsLine) {
  try {
    parse_jsonl("{\"a\":1}\n{oops\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMalformed);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Codecs, CsvDuplicateHeaderIsMalformed) {
  try {
    parse_csv("a,b,a\n1,2,3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMalformed);
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
  }
}

TEST(Codecs, CsvWithoutManifestIsAllText) {
  Dataset d = parse_csv("n,flag\n1,true\n");
  EXPECT_EQ(d.at(0, "n").kind(), Kind::kText);
  EXPECT_EQ(d.at(0, "flag").as_text(), "true");
}

TEST(Codecs, CsvQuotingRoundTrip) {
  Dataset d = rows(Json::parse(R"([{"t":"a,b"},{"t":"say \"hi\""},{"t":"line\nbreak"},{"t":null}])"));
  Dataset back = parse_csv(to_csv(d), csv_manifest_for(d));
  EXPECT_EQ(back, d);
}

TEST(Session, OpenMissingAndEmptyFiles) {
  TempDir dir;
  auto absent = StorageSession::open(dir / "none.jsonl", Format::kJsonl);
  EXPECT_EQ(absent->row_count(), 0u);
  write_file(dir / "empty.jsonl", "");
  auto empty = StorageSession::open(dir / "empty.jsonl", Format::kJsonl);
  EXPECT_EQ(empty->row_count(), 0u);
  EXPECT_TRUE(empty->columns().empty());
}

TEST(Session, ReadSelection) {
  StorageSession s(rows(Json::parse(R"([{"text":"a","n":1},{"text":"b","n":2},{"text":"c","n":3}])")));
  Dataset d = s.read({"text"});
  EXPECT_EQ(d.row_count(), 3u);
  EXPECT_EQ(d.column_count(), 1u);
  auto rev = s.revision();
  EXPECT_EQ(s.read().column_count(), 2u);
  EXPECT_EQ(s.revision(), rev);
}

TEST(Session, ReadMissingColumnListsAvailable) {
  StorageSession s(three_texts());
  try {
    s.read({"score"});
    FAIL();
  } catch (const MissingColumnError& e) {
    EXPECT_EQ(e.code(), Errc::kMissingColumn);
    EXPECT_EQ(e.available(), std::vector<std::string>{"text"});
  }
}

TEST(Session, NewColumnAndAppend) {
  StorageSession s(three_texts());
  EXPECT_EQ(s.write(NewColumn{"score", {FieldValue::integer(1), FieldValue::integer(2),
                                        FieldValue::integer(3)}}),
            3u);
  EXPECT_EQ(s.columns(), (std::vector<std::string>{"text", "score"}));
  EXPECT_EQ(s.write(AppendRows{{{{"text", FieldValue::text("d")}}, {{"text", FieldValue::text("e")}}}}),
            5u);
}

TEST(Session, LengthMismatchLeavesRevision) {
  StorageSession s(three_texts());
  auto rev = s.revision();
  EXPECT_ERRC(s.write(NewColumn{"score", {FieldValue::integer(1), FieldValue::integer(2)}}),
              Errc::kLengthMismatch);
  EXPECT_EQ(s.revision(), rev);
  EXPECT_EQ(s.read(), three_texts());
}

TEST(Session, ReadIsASnapshot) {
  StorageSession s(three_texts());
  Dataset before = s.read();
  Dataset copy = before;
  s.write(NewColumn{"n", std::vector<FieldValue>(3, FieldValue::integer(0))});
  s.write(AppendRows{{{{"text", FieldValue::text("z")}}}});
  EXPECT_EQ(before, copy);
}

TEST(Session, RevisionsStrictlyIncrease) {
  StorageSession s(three_texts());
  std::vector<std::uint64_t> seen{s.revision()};
  for (int i = 0; i < 10; ++i) {
    s.write(AppendRows{{{{"text", FieldValue::text(std::to_string(i))}}}});
    seen.push_back(s.revision());
  }
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_GT(seen[i], seen[i - 1]);
}

TEST(Session, ConcurrentWriterIsRejected) {
  std::atomic<bool> inside{false}, release{false};
  // Only file-backed sessions call the hook, which holds the writer slot open.
  TempDir dir;
  auto f = StorageSession::open(dir / "d.jsonl", Format::kJsonl);
  f->set_commit_hook([&](const std::filesystem::path&) {
    inside = true;
    while (!release) std::this_thread::yield();
  });
  std::thread writer([&] { f->write(AppendRows{{{{"text", FieldValue::text("x")}}}}); });
  while (!inside) std::this_thread::yield();
  EXPECT_ERRC(f->write(AppendRows{{{{"text", FieldValue::text("y")}}}}), Errc::kConcurrentWriter);
  release = true;
  writer.join();
  EXPECT_EQ(f->row_count(), 1u);
}

TEST(Session, FailedPersistenceLeavesFileIntact) {
  TempDir dir;
  auto path = dir / "d.jsonl";
  auto s = StorageSession::open(path, Format::kJsonl);
  s->write(ReplaceDataset{three_texts()});
  const auto bytes = read_file(path);
  s->set_commit_hook([](const std::filesystem::path&) {
    throw std::runtime_error("disk full");
  });
  EXPECT_ERRC(s->write(AppendRows{{{{"text", FieldValue::text("d")}}}}), Errc::kPersistence);
  EXPECT_EQ(read_file(path), bytes);
  EXPECT_EQ(s->read(), three_texts());
}

TEST(Session, FileBackedPersistsEachWrite) {
  TempDir dir;
  auto path = dir / "d.json";
  {
    auto s = StorageSession::open(path, Format::kJson);
    s->write(ReplaceDataset{three_texts()});
  }
  auto again = StorageSession::open(path, Format::kJson);
  EXPECT_EQ(again->read(), three_texts());
}

TEST(Session, OneRunLeaseAtATime) {
  StorageSession s;
  auto a = s.try_acquire_run();
  ASSERT_TRUE(a);
  EXPECT_FALSE(s.try_acquire_run());
  { auto moved = std::move(*a); }
  a.reset();
  EXPECT_TRUE(s.try_acquire_run());
}

TEST(Checkpoint, RoundTripAndDigestDeterminism) {
  TempDir dir;
  Dataset d = rows(Json::parse(R"([{"text":"a","v":null},{"text":null,"v":2.5}])"));
  StorageSession s(d);
  auto ref = s.snapshot("op2", dir.path());
  EXPECT_EQ(restore(ref), d);
  EXPECT_EQ(ref.location, dir / "op2.jsonl");
  EXPECT_TRUE(std::filesystem::exists(dir / "op2.meta.json"));
  auto again = s.snapshot("op2-again", dir.path());
  EXPECT_EQ(ref.digest, again.digest);
  EXPECT_EQ(ref.digest, dataset_digest(d));
  EXPECT_EQ(ref.digest, sha256_hex(to_jsonl(d)));
  auto loaded = load_checkpoint_ref(dir.path(), "op2");
  EXPECT_EQ(loaded.digest, ref.digest);
}

TEST(Checkpoint, TamperedAndMissingSnapshots) {
  TempDir dir;
  StorageSession s(three_texts());
  auto ref = s.snapshot("stage", dir.path());
  write_file(ref.location, "{\"text\":\"tampered\"}\n");
  EXPECT_ERRC(restore(ref), Errc::kDigestMismatch);
  std::filesystem::remove(ref.location);
  EXPECT_ERRC(restore(ref), Errc::kMissingSnapshot);
}

TEST(Codecs, LoadDatasetRejectsUnknownFormatName) {
  EXPECT_FALSE(parse_format("parquet"));
  EXPECT_EQ(parse_format("csv"), Format::kCsv);
}

}  // namespace
}  // namespace dataprep
