#include <gtest/gtest.h>

#include "vchat/provenance.hpp"

namespace vchat {
namespace {

TEST(Provenance, LinearChainIsAPath) {
  const std::vector<std::string> files{"image/o0ec.png", "image/a1_depth-of_o0ec_flower.png",
                                       "image/b2_depth2image_a1_flower.png", "image/c3_pix2pix_b2_flower.png"};
  const auto graph = build_provenance(files);
  EXPECT_EQ(graph.nodes.size(), 4u);
  ASSERT_EQ(graph.edges.size(), 3u);
  EXPECT_TRUE(graph.dangling.empty());
  EXPECT_EQ(graph.root_of("c3"), "o0ec");
  EXPECT_EQ(graph.lineage("c3"), (std::vector<std::string>{"depth-of", "depth2image", "pix2pix"}));
  EXPECT_EQ(graph.incoming("b2")->from, "a1");
  EXPECT_EQ(graph.find("o0ec")->kind, NodeKind::upload);
}

TEST(Provenance, EmptyWorkspace) {
  const auto graph = build_provenance({});
  EXPECT_TRUE(graph.nodes.empty());
  EXPECT_EQ(graph.to_json().dump(), R"({"nodes":[],"edges":[]})");
}

TEST(Provenance, DisjointUploads) {
  const std::vector<std::string> files{"image/aa.png", "image/bb.png", "image/cc_edge-of_aa_aa.png",
                                       "image/dd_seg-of_bb_bb.png"};
  const auto graph = build_provenance(files);
  EXPECT_EQ(graph.root_of("cc"), "aa");
  EXPECT_EQ(graph.root_of("dd"), "bb");
  EXPECT_EQ(graph.edges.size(), 2u);
}

TEST(Provenance, DanglingAndUnparseable) {
  const std::vector<std::string> files{"image/cc_edge-of_gone_org.png", "image/not_a_name.png", "notes.txt"};
  const auto graph = build_provenance(files);
  EXPECT_EQ(graph.dangling, std::vector<std::string>{"gone"});
  EXPECT_EQ(graph.unparseable.size(), 2u);
}

TEST(Provenance, DuplicateIdsAndCyclesAreDiagnosed) {
  const std::vector<std::string> dupes{"image/aa.png", "image/aa.jpg"};
  EXPECT_EQ(build_provenance(dupes).diagnostics.size(), 1u);

  const std::vector<std::string> cycle{"image/aa_x_bb_o.png", "image/bb_y_aa_o.png"};
  const auto graph = build_provenance(cycle);
  EXPECT_EQ(graph.edges.size(), 1u);
  EXPECT_FALSE(graph.diagnostics.empty());
  EXPECT_EQ(graph.lineage("bb").size(), 1u);
}

TEST(Provenance, JsonShape) {
  const std::vector<std::string> files{"image/aa.png", "image/bb_edge-of_aa_aa.png"};
  EXPECT_EQ(build_provenance(files).to_json().dump(),
            R"({"nodes":[{"id":"aa","path":"image/aa.png","kind":"upload"},)"
            R"({"id":"bb","path":"image/bb_edge-of_aa_aa.png","kind":"derived"}],)"
            R"("edges":[{"from":"aa","to":"bb","operation":"edge-of"}]})");
}

} // namespace
} // namespace vchat
