#include <gtest/gtest.h>

#include <sstream>

#include "nhyb/sparse.hpp"

using namespace nhyb;

TEST(Sparse, TripletsSumDuplicates) {
    const CsrMatrix a = CsrMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {0, 0, 2.0}, {2, 1, -1.0}, {1, 2, 4.0}});
    EXPECT_EQ(a.nonzeros(), 3u);
    EXPECT_DOUBLE_EQ(a.at(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(a.at(2, 1), -1.0);
    EXPECT_DOUBLE_EQ(a.at(1, 1), 0.0);
    const std::vector<double> x{1.0, 2.0, 3.0};
    const std::vector<double> y = a * x;
    EXPECT_DOUBLE_EQ(y[0], 3.0);
    EXPECT_DOUBLE_EQ(y[1], 12.0);
    EXPECT_DOUBLE_EQ(y[2], -2.0);
    EXPECT_DOUBLE_EQ(a.asymmetry(), 5.0);
}

TEST(Sparse, BlockPatternMatchesBuilder) {
    BlockList blocks;
    SparsityBuilder builder(6);
    const std::vector<std::vector<int>> elems{{0, 1, 2}, {1, 2, 3}, {4, 5, 3}, {0, 5}};
    for (const auto& e : elems) {
        blocks.add(e);
        builder.add_block(e);
    }
    const CsrMatrix a = pattern_from_blocks(6, blocks);
    const CsrMatrix b = builder.build();
    EXPECT_EQ(a.row_ptr(), b.row_ptr());
    EXPECT_EQ(a.col_idx(), b.col_idx());
}

TEST(Sparse, AddOutsidePatternThrows) {
    CsrMatrix a = CsrMatrix::identity(3);
    a.add(1, 1, 2.0);
    EXPECT_DOUBLE_EQ(a.at(1, 1), 3.0);
    EXPECT_THROW(a.add(0, 2, 1.0), Error);
}

TEST(Sparse, TripletDump) {
    const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {{0, 1, 0.5}, {1, 0, 0.5}});
    std::ostringstream os;
    write_triplets(os, a);
    EXPECT_EQ(os.str(), "# rows 2 cols 2 nnz 2\n0 1 0.5\n1 0 0.5\n");
}
