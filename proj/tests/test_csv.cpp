#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace fknock;

TEST(Csv, CurvesRoundTrip)
{
    std::vector<RawCurve> in{{0, 0, {{0.1, 1.5}, {0.7, -2.0}}}, {0, 1, {{0.2, 3.0}}},
                             {1, 0, {{0.3, 0.25}}}, {1, 1, {{0.9, 1e-17}}}};
    std::stringstream s;
    csv::write_curves(s, in);
    int n = 0, p = 0;
    const auto out = csv::read_curves(s, &n, &p);
    EXPECT_EQ(n, 2);
    EXPECT_EQ(p, 2);
    ASSERT_EQ(out.size(), 4u);
    EXPECT_EQ(out[0].samples.size(), 2u);
    EXPECT_EQ(out[0].samples[1].w, -2.0);
    EXPECT_EQ(out[3].samples[0].w, 1e-17);
}

TEST(Csv, CurvesRejectBadInput)
{
    std::stringstream a("sample,variable,t,value\n");
    EXPECT_THROW(csv::read_curves(a), ConfigError);
    std::stringstream b("sample_id,variable_id,t,value\n0,0,0.1\n");
    EXPECT_THROW(csv::read_curves(b), ConfigError);
    std::stringstream c("sample_id,variable_id,t,value\n0,0,0.1,abc\n");
    EXPECT_THROW(csv::read_curves(c), ConfigError);
    std::stringstream d("sample_id,variable_id,t,value\n0,0,0.1,1\n1,1,0.1,1\n");
    EXPECT_THROW(csv::read_curves(d), ConfigError); // missing pairs
}

TEST(Csv, CoordinatesRoundTrip)
{
    std::vector<MatrixXd> c{MatrixXd::Random(3, 4), MatrixXd::Random(3, 4)};
    std::stringstream s;
    csv::write_coords(s, c);
    const auto back = csv::read_coords(s, 4);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0], c[0]);
    EXPECT_EQ(back[1], c[1]);
}

TEST(Csv, MatrixAndResponseRoundTrip)
{
    const MatrixXd m = MatrixXd::Random(4, 3);
    std::stringstream s;
    csv::write_matrix(s, m);
    EXPECT_EQ(csv::read_matrix(s), m);
    VectorXd y = VectorXd::Random(5);
    std::stringstream t;
    csv::write_response(t, y);
    EXPECT_EQ(csv::read_response(t), y);
}

TEST(Csv, SelectionAndMetricsFormat)
{
    SelectionResult r;
    r.selected = {0, 2};
    r.thresholds = {2.0};
    r.q = 0.5;
    r.metrics = {0.5, 1.0};
    VectorXd w(3);
    w << 3, -1, 2;
    std::stringstream s, m;
    csv::write_selection(s, w, r);
    EXPECT_EQ(s.str(), "index_or_edge,w_value,selected_flag\n0,3,1\n1,-1,0\n2,2,1\n");
    csv::write_metrics(m, r, "-");
    EXPECT_EQ(m.str(), "q,delta,rule,fdp,power,threshold\n0.5,0,-,0.5,1,2\n");
}

TEST(Csv, FitExport)
{
    GroupLassoFit f;
    f.blocks = {MatrixXd::Constant(1, 1, 3.0), MatrixXd::Zero(2, 1)};
    std::stringstream s;
    csv::write_fit(s, f);
    EXPECT_EQ(s.str(), "group_id,frobenius_norm,active_flag\n0,3,1\n1,0,0\n");
}
