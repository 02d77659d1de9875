/**
 * @file vtk_io.hpp
 * @brief Legacy-VTK ASCII point-cloud writer for particle snapshots.
 */
#ifndef MOSPH_VTK_IO_HPP
#define MOSPH_VTK_IO_HPP

#include "core.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace mosph
{

struct VtkPointCloud
{
    std::vector<Vec3> points;
    std::vector<std::pair<std::string, const std::vector<Real> *>> scalars;
    std::vector<std::pair<std::string, const std::vector<Vec3> *>> vectors;
};

inline void writeVtkPointCloud(const VtkPointCloud &cloud, const std::string &path,
                               const std::string &title = "mosph snapshot")
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open VTK output file: " + path);
    out.precision(9);
    const std::size_t n = cloud.points.size();
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET POLYDATA\n";
    out << "POINTS " << n << " double\n";
    for (const auto &p : cloud.points)
        out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    out << "VERTICES " << n << ' ' << 2 * n << '\n';
    for (std::size_t i = 0; i < n; ++i)
        out << "1 " << i << '\n';
    if (!cloud.scalars.empty() || !cloud.vectors.empty())
    {
        out << "POINT_DATA " << n << '\n';
        for (const auto &[name, data] : cloud.scalars)
        {
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (const Real v : *data)
                out << v << '\n';
        }
        for (const auto &[name, data] : cloud.vectors)
        {
            out << "VECTORS " << name << " double\n";
            for (const auto &v : *data)
                out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
        }
    }
}

} // namespace mosph
#endif // MOSPH_VTK_IO_HPP
