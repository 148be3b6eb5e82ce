#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "schwarz_inpaint/masks.hpp"
#include "schwarz_inpaint/pnm.hpp"
#include "schwarz_inpaint/synthetic.hpp"

namespace si = schwarz_inpaint;

namespace {

std::string temp_path(const std::string& name) { return testing::TempDir() + name; }

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  ASSERT_TRUE(out.good());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in.good()) << path;
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

}  // namespace

TEST(Pnm, CanonicalGreyBytes) {
  si::ImageBuffer image(2, 2, 1, 0.5);
  const auto path = temp_path("canon.pgm");
  si::write_pnm(path, image);
  // 0.5 * 255 = 127.5 rounds to 128 = 0x80.
  const std::string expected = std::string("P5\n2 2\n255\n") + "\x80\x80\x80\x80";
  EXPECT_EQ(read_bytes(path), expected);
  std::remove(path.c_str());
}

TEST(Pnm, GreyRoundTripIsByteIdentical) {
  const auto image = si::synthetic_test_image(33, 17, 1, 9);
  const auto a = temp_path("grey_a.pgm");
  const auto b = temp_path("grey_b.pgm");
  si::write_pnm(a, image);
  const auto back = si::read_pnm(a);
  EXPECT_EQ(back.width, 33);
  EXPECT_EQ(back.height, 17);
  EXPECT_EQ(back.channels, 1);
  si::write_pnm(b, back);
  EXPECT_EQ(read_bytes(a), read_bytes(b));
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST(Pnm, ColourRoundTripIsByteIdentical) {
  const auto image = si::synthetic_test_image(21, 14, 3, 11);
  const auto a = temp_path("colour_a.ppm");
  const auto b = temp_path("colour_b.ppm");
  si::write_pnm(a, image);
  const auto back = si::read_pnm(a);
  EXPECT_EQ(back.channels, 3);
  si::write_pnm(b, back);
  EXPECT_EQ(read_bytes(a), read_bytes(b));
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST(Pnm, InterleavedColourOrder) {
  const auto path = temp_path("order.ppm");
  write_bytes(path, std::string("P6\n1 1\n255\n") + std::string("\xff\x80\x00", 3));
  const auto image = si::read_pnm(path);
  EXPECT_DOUBLE_EQ(image.at(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(image.at(0, 0, 1), 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(image.at(0, 0, 2), 0.0);
  std::remove(path.c_str());
}

TEST(Pnm, WriterClampsOutOfRangeValues) {
  si::ImageBuffer image(2, 1, 1);
  image.data = {-0.25, 1.75};
  const auto path = temp_path("clamp.pgm");
  si::write_pnm(path, image);
  const auto bytes = read_bytes(path);
  ASSERT_EQ(bytes.size(), std::string("P5\n2 1\n255\n").size() + 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[bytes.size() - 2]), 0u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[bytes.size() - 1]), 255u);
  std::remove(path.c_str());
}

TEST(Pnm, HeaderCommentsAreAccepted) {
  const auto path = temp_path("comments.pgm");
  write_bytes(path, std::string("P5 # created by hand\n# another note\n 2 1 # w h\n255\n") +
                        "\x01\x02");
  const auto image = si::read_pnm(path);
  EXPECT_EQ(image.width, 2);
  EXPECT_EQ(image.height, 1);
  EXPECT_DOUBLE_EQ(image.at(0, 0, 0), 1.0 / 255.0);
  EXPECT_DOUBLE_EQ(image.at(1, 0, 0), 2.0 / 255.0);
  std::remove(path.c_str());
}

TEST(Pnm, MalformedFilesNameTheByteOffset) {
  const auto check_throws = [](const std::string& name, const std::string& bytes) {
    const auto path = temp_path(name);
    std::ofstream(path, std::ios::binary) << bytes;
    try {
      si::read_pnm(path);
      FAIL() << name << " should not parse";
    } catch (const std::runtime_error& e) {
      EXPECT_NE(std::string(e.what()).find("byte "), std::string::npos)
          << name << ": message lacks an offset: " << e.what();
    }
    std::remove(path.c_str());
  };
  check_throws("magic.pgm", "P3\n1 1\n255\n0");
  check_throws("trunc.pgm", "P5\n4 4\n255\nabc");
  check_throws("maxval.pgm", std::string("P5\n1 1\n65535\n") + "\x00\x00");
  check_throws("nowidth.pgm", "P5\nx 1\n255\n0");
  check_throws("huge.pgm", "P5\n99999999999 1\n255\n0");

  EXPECT_THROW(si::read_pnm(temp_path("no_such_file.pgm")), std::runtime_error);
}

TEST(Pbm, RoundTripAcrossAwkwardWidths) {
  for (int w : {1, 8, 9, 17, 31}) {
    const auto mask = si::random_mask(w, 5, 0.4, 100 + w);
    const auto a = temp_path("mask_a.pbm");
    const auto b = temp_path("mask_b.pbm");
    si::write_mask_pbm(a, mask);
    const auto back = si::read_mask_pbm(a);
    EXPECT_EQ(back.known, mask.known) << "width " << w;
    si::write_mask_pbm(b, back);
    EXPECT_EQ(read_bytes(a), read_bytes(b)) << "width " << w;
    std::remove(a.c_str());
    std::remove(b.c_str());
  }
}

TEST(Pbm, BitOrderIsMsbFirst) {
  si::InpaintingMask mask(9, 1);
  mask.known[0] = 1;  // first bit of byte 0
  mask.known[8] = 1;  // first bit of byte 1
  const auto path = temp_path("bits.pbm");
  si::write_mask_pbm(path, mask);
  const auto bytes = read_bytes(path);
  const std::string header = "P4\n9 1\n";
  ASSERT_EQ(bytes.size(), header.size() + 2);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size()]), 0x80u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 1]), 0x80u);
  std::remove(path.c_str());
}

TEST(Pbm, PaddingBitsAreIgnoredOnRead) {
  // Width 3: five trailing pad bits per row.  Set them all; the reader must
  // only look at the first three.
  const auto path = temp_path("padded.pbm");
  write_bytes(path, std::string("P4\n3 2\n") + "\xbf\x5f");
  const auto mask = si::read_mask_pbm(path);
  EXPECT_TRUE(mask.is_known(0, 0));
  EXPECT_FALSE(mask.is_known(1, 0));
  EXPECT_TRUE(mask.is_known(2, 0));
  EXPECT_FALSE(mask.is_known(0, 1));
  EXPECT_TRUE(mask.is_known(1, 1));
  EXPECT_FALSE(mask.is_known(2, 1));
  EXPECT_EQ(mask.known_count(), 3u);
  std::remove(path.c_str());
}

TEST(Pbm, DimensionGuardNamesBothShapes) {
  const auto path = temp_path("guard.pbm");
  si::write_mask_pbm(path, si::random_mask(6, 4, 0.5, 1));
  EXPECT_NO_THROW(si::read_mask_pbm(path, 6, 4));
  try {
    si::read_mask_pbm(path, 8, 8);
    FAIL() << "mismatched mask should not load";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("6x4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("8x8"), std::string::npos) << msg;
  }
  std::remove(path.c_str());
}

TEST(Pbm, RejectsWrongMagicAndTruncation) {
  const auto bad_magic = temp_path("bad_magic.pbm");
  write_bytes(bad_magic, "P1\n2 2\n0 1 1 0\n");
  EXPECT_THROW(si::read_mask_pbm(bad_magic), std::runtime_error);
  std::remove(bad_magic.c_str());

  const auto trunc = temp_path("trunc.pbm");
  write_bytes(trunc, "P4\n16 4\n\x01");
  EXPECT_THROW(si::read_mask_pbm(trunc), std::runtime_error);
  std::remove(trunc.c_str());
}
