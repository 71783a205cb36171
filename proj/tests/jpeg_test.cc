// Copyright 2026 The degradekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JPEG stage checked against libjpeg as a reference codec.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <jpeglib.h>

#include <gtest/gtest.h>

#include "degradekit/degrade.h"
#include "degradekit/error.h"
#include "degradekit/image.h"
#include "degradekit/rng.h"

namespace degradekit {
namespace {

const std::string kData = DEGRADEKIT_TEST_DATA;

ImageBuf Face() { return ReadPng(kData + "/astronaut_face_112.png"); }

// Encode at `quality` with 4:2:0 and decode again.
ImageBuf LibjpegRoundTrip(const ImageBuf& img, int quality) {
  jpeg_compress_struct c{};
  jpeg_error_mgr cerr{};
  c.err = jpeg_std_error(&cerr);
  jpeg_create_compress(&c);
  unsigned char* buf = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&c, &buf, &size);
  c.image_width = static_cast<JDIMENSION>(img.width());
  c.image_height = static_cast<JDIMENSION>(img.height());
  c.input_components = 3;
  c.in_color_space = JCS_RGB;
  jpeg_set_defaults(&c);
  jpeg_set_quality(&c, quality, TRUE);
  c.dct_method = JDCT_FLOAT;
  c.comp_info[0].h_samp_factor = 2;
  c.comp_info[0].v_samp_factor = 2;
  jpeg_start_compress(&c, TRUE);
  std::vector<uint8_t> row(static_cast<size_t>(img.width()) * 3);
  while (c.next_scanline < c.image_height) {
    const int y = static_cast<int>(c.next_scanline);
    std::copy_n(img.data().begin() + static_cast<long>(y) * img.width() * 3,
                row.size(), row.begin());
    JSAMPROW rows[1] = {row.data()};
    jpeg_write_scanlines(&c, rows, 1);
  }
  jpeg_finish_compress(&c);
  jpeg_destroy_compress(&c);

  jpeg_decompress_struct d{};
  jpeg_error_mgr derr{};
  d.err = jpeg_std_error(&derr);
  jpeg_create_decompress(&d);
  jpeg_mem_src(&d, buf, size);
  jpeg_read_header(&d, TRUE);
  d.out_color_space = JCS_RGB;
  d.dct_method = JDCT_FLOAT;
  d.do_fancy_upsampling = TRUE;
  jpeg_start_decompress(&d);
  ImageBuf out(static_cast<int>(d.output_width),
               static_cast<int>(d.output_height), 3);
  while (d.output_scanline < d.output_height) {
    JSAMPROW rows[1] = {out.data().data() +
                        static_cast<size_t>(d.output_scanline) * out.width() * 3};
    jpeg_read_scanlines(&d, rows, 1);
  }
  jpeg_finish_decompress(&d);
  jpeg_destroy_decompress(&d);
  std::free(buf);
  return out;
}

std::array<uint16_t, 64> LibjpegTable(int quality, int which) {
  jpeg_compress_struct c{};
  jpeg_error_mgr err{};
  c.err = jpeg_std_error(&err);
  jpeg_create_compress(&c);
  c.in_color_space = JCS_RGB;
  jpeg_set_defaults(&c);
  jpeg_set_quality(&c, quality, TRUE);
  std::array<uint16_t, 64> t{};
  for (int i = 0; i < 64; ++i) t[i] = c.quant_tbl_ptrs[which]->quantval[i];
  jpeg_destroy_compress(&c);
  return t;
}

TEST(JpegTablesTest, Quality50IsAnnexK) {
  const JpegQuantTables t = MakeJpegQuantTables(50);
  EXPECT_EQ(t.luma, kAnnexKLuma);
  EXPECT_EQ(t.chroma, kAnnexKChroma);
  EXPECT_EQ(kAnnexKLuma, LibjpegTable(50, 0));
  EXPECT_EQ(kAnnexKChroma, LibjpegTable(50, 1));
}

TEST(JpegTablesTest, ScalingMatchesReferenceForEveryQuality) {
  for (int q = 1; q <= 100; ++q) {
    const JpegQuantTables t = MakeJpegQuantTables(q);
    EXPECT_EQ(t.luma, LibjpegTable(q, 0)) << q;
    EXPECT_EQ(t.chroma, LibjpegTable(q, 1)) << q;
  }
}

TEST(JpegTablesTest, HandValues) {
  // q = 4: scale 1250, 16 * 1250 = 20000 -> 200; 40 * 12.5 = 500 -> 255.
  const JpegQuantTables t = MakeJpegQuantTables(4);
  EXPECT_EQ(t.luma[0], 200);
  EXPECT_EQ(t.luma[5], 255);
  // q = 100: scale 0 -> every entry clamps to 1.
  for (uint16_t v : MakeJpegQuantTables(100).luma) EXPECT_EQ(v, 1);
  EXPECT_THROW(MakeJpegQuantTables(0), InvalidArgument);
  EXPECT_THROW(MakeJpegQuantTables(101), InvalidArgument);
}

TEST(JpegTest, DimensionsPreserved) {
  CounterRng rng(3);
  for (auto [w, h] : {std::pair{1, 1}, {37, 23}, {16, 16}, {17, 9}, {112, 112}}) {
    ImageBuf img(w, h, 3);
    for (uint8_t& v : img.data()) v = static_cast<uint8_t>(rng.NextU64());
    for (int q : {4, 50, 95}) {
      const ImageBuf out = JpegRecompress(img, q);
      EXPECT_EQ(out.width(), w);
      EXPECT_EQ(out.height(), h);
      EXPECT_EQ(out.channels(), 3);
    }
  }
}

TEST(JpegTest, RejectsGray) {
  EXPECT_THROW(JpegRecompress(ImageBuf(8, 8, 1), 50), InvalidArgument);
}

TEST(JpegTest, PsnrStrictlyDecreasesWithQuality) {
  const ImageBuf face = Face();
  double prev_ours = 1e9, prev_ref = 1e9;
  for (int q : {64, 32, 16, 8, 4}) {
    const double ours = Psnr(JpegRecompress(face, q), face);
    const double ref = Psnr(LibjpegRoundTrip(face, q), face);
    EXPECT_LT(ours, prev_ours) << q;
    EXPECT_LT(ref, prev_ref) << q;
    prev_ours = ours;
    prev_ref = ref;
  }
}

TEST(JpegTest, AgreesWithReferenceCodec) {
  const ImageBuf face = Face();
  for (int q : {95, 64, 32, 16, 8, 4}) {
    const ImageBuf ours = JpegRecompress(face, q);
    const ImageBuf ref = LibjpegRoundTrip(face, q);
    const double to_ref = Psnr(ours, ref);
    const double dq_ours = Psnr(ours, face);
    const double dq_ref = Psnr(ref, face);
    std::printf("q=%3d  psnr(ours,ref)=%.2f  psnr(ours,src)=%.2f  "
                "psnr(ref,src)=%.2f\n", q, to_ref, dq_ours, dq_ref);
    // Both codecs lose about the same amount of quality.
    EXPECT_NEAR(dq_ours, dq_ref, 0.05) << q;
    // And land close to each other.
    EXPECT_GT(to_ref, 45.0) << q;
  }
}

}  // namespace
}  // namespace degradekit
