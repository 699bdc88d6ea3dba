#include <gtest/gtest.h>

#include <sstream>

#include "trajseq/csv.hpp"

using namespace trajseq;

TEST(Csv, QuotedFieldsRoundTrip) {
    std::ostringstream out;
    CsvWriter w(out);
    w.comment("meta");
    w.row({"a", "b,c", "say \"hi\"", "line\nbreak", "#hash"});
    w.field(1.5).field(7LL).field(std::string_view("x")).end_row();

    std::istringstream in(out.str());
    CsvReader r(in);
    std::vector<std::string> f;
    ASSERT_TRUE(r.next(f));
    EXPECT_EQ(f, (std::vector<std::string>{"a", "b,c", "say \"hi\"", "line\nbreak", "#hash"}));
    ASSERT_TRUE(r.next(f));
    EXPECT_EQ(f, (std::vector<std::string>{"1.5", "7", "x"}));
    EXPECT_FALSE(r.next(f));
    ASSERT_EQ(r.comments().size(), 1u);
}

TEST(Csv, CommentsAndBlankLinesAreSkipped) {
    std::istringstream in("# top\nh1,h2\n\n1,2\n# mid\n3,4\n");
    CsvReader r(in);
    std::vector<std::string> f;
    ASSERT_TRUE(r.next(f));
    EXPECT_EQ(r.record_number(), 1u);
    ASSERT_TRUE(r.next(f));
    EXPECT_EQ(f[1], "2");
    ASSERT_TRUE(r.next(f));
    EXPECT_EQ(f[0], "3");
    EXPECT_EQ(r.record_number(), 3u);
    EXPECT_EQ(r.comments().size(), 2u);
}

TEST(Csv, HeaderLookupIgnoresCaseAndBom) {
    CsvHeader h({"\xEF\xBB\xBF" "Event_Date", "LATITUDE"});
    EXPECT_EQ(h.find("event_date"), 0u);
    EXPECT_EQ(h.require("latitude"), 1u);
    EXPECT_FALSE(h.find("longitude"));
    EXPECT_THROW(h.require("longitude"), Error);
}

TEST(Csv, NumberParsing) {
    EXPECT_EQ(parse_double(" 2.5 "), 2.5);
    EXPECT_FALSE(parse_double("2.5x"));
    EXPECT_FALSE(parse_double(""));
    EXPECT_EQ(parse_int("-12"), -12);
    EXPECT_FALSE(parse_int("1.0"));
    // Shortest representation that reads back exactly.
    const double v = 0.1 + 0.2;
    EXPECT_EQ(parse_double(format_double(v)), v);
}
