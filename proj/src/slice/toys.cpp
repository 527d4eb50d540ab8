#include "moduli/slice/toys.hpp"

#include <Eigen/Geometry>

namespace moduli::slice {

using numerics::LabeledBasis;
using numerics::RealOperator;

ActionSystem so2_plane(bool cut_radial) {
    ActionSystem sys;
    sys.name = cut_radial ? "so2-plane-cut" : "so2-plane";
    sys.structure_space = LabeledBasis::euclidean("R2", 2);
    sys.group_chart = LabeledBasis::euclidean("so2", 1);
    const Eigen::Vector2d j0(1.0, 0.0);
    sys.act = [j0](const Eigen::VectorXd& xi, const Eigen::VectorXd& j) {
        const Eigen::Rotation2Dd r(xi(0));
        return Eigen::VectorXd(r * (j0 + j) - j0);
    };
    sys.P = BlockOperator<double>::single(RealOperator(sys.group_chart, sys.structure_space, Eigen::Vector2d(0.0, 1.0)));
    if (cut_radial) sys.integrability = [](const Eigen::VectorXd& j) { return Eigen::VectorXd(j.head(1)); };
    sys.chart_radius = 1.0;
    return sys;
}

Eigen::Matrix3d hat(const Eigen::Vector3d& xi) {
    Eigen::Matrix3d m;
    m << 0.0, -xi(2), xi(1), xi(2), 0.0, -xi(0), -xi(1), xi(0), 0.0;
    return m;
}

Eigen::Matrix3d sym_from_coords(const Eigen::VectorXd& s) {
    Eigen::Matrix3d m;
    int k = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            m(i, j) = s(k);
            m(j, i) = s(k);
            ++k;
        }
    return m;
}

Eigen::VectorXd sym_to_coords(const Eigen::Matrix3d& m) {
    Eigen::VectorXd s(6);
    int k = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) s(k++) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

ActionSystem so3_symmetric(const Eigen::Vector3d& d) {
    ActionSystem sys;
    sys.name = "so3-symmetric";
    std::vector<numerics::Label> labels;
    Eigen::VectorXd w(6);
    int k = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            labels.push_back({i, j});
            w(k++) = i == j ? 1.0 : 2.0;
        }
    sys.structure_space = LabeledBasis::diagonal("Sym3", labels, w);
    sys.group_chart = LabeledBasis::euclidean("so3", 3);
    const Eigen::Matrix3d j0 = d.asDiagonal();
    sys.act = [j0](const Eigen::VectorXd& xi, const Eigen::VectorXd& s) {
        const Eigen::Vector3d v = xi.head<3>();
        const double a = v.norm();
        const Eigen::Matrix3d g =
            a > 0.0 ? Eigen::Matrix3d(Eigen::AngleAxisd(a, v / a).toRotationMatrix()) : Eigen::Matrix3d::Identity();
        return sym_to_coords(g.transpose() * (j0 + sym_from_coords(s)) * g - j0);
    };
    Eigen::MatrixXd p(6, 3);
    for (int c = 0; c < 3; ++c) {
        const Eigen::Matrix3d x = hat(Eigen::Vector3d::Unit(c));
        p.col(c) = sym_to_coords(j0 * x - x * j0);
    }
    sys.P = BlockOperator<double>::single(RealOperator(sys.group_chart, sys.structure_space, p));
    sys.chart_radius = 0.5;
    return sys;
}

ActionSystem translation(Index dim) {
    ActionSystem sys;
    sys.name = "translation";
    sys.structure_space = LabeledBasis::euclidean("Rn", dim);
    sys.group_chart = LabeledBasis::euclidean("Rn-group", dim);
    sys.act = [](const Eigen::VectorXd& xi, const Eigen::VectorXd& j) { return Eigen::VectorXd(j + xi); };
    sys.P = BlockOperator<double>::single(
        RealOperator(sys.group_chart, sys.structure_space, Eigen::MatrixXd::Identity(dim, dim)));
    sys.chart_radius = 1.0;
    return sys;
}

ActionSystem trivial_action(Index structure_dim, Index group_dim) {
    ActionSystem sys;
    sys.name = "trivial";
    sys.structure_space = LabeledBasis::euclidean("Rn", structure_dim);
    sys.group_chart = LabeledBasis::euclidean("trivial-group", group_dim);
    sys.act = [](const Eigen::VectorXd&, const Eigen::VectorXd& j) { return j; };
    sys.P = BlockOperator<double>::single(
        RealOperator(sys.group_chart, sys.structure_space, Eigen::MatrixXd::Zero(structure_dim, group_dim)));
    sys.chart_radius = 1.0;
    return sys;
}

} // namespace moduli::slice
