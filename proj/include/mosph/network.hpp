/**
 * @file network.hpp
 * @brief Purkinje-network tree: branches of nodes with mother/child topology,
 *        text export/import.
 */
#ifndef MOSPH_NETWORK_HPP
#define MOSPH_NETWORK_HPP

#include "core.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mosph
{

struct Branch
{
    /// Ordered node ids; the first entry is inherited from the mother branch
    /// (or is the seed node for the root branch).
    std::vector<std::uint32_t> node_ids;
    std::int32_t mother = -1;
    std::vector<std::uint32_t> children;
    bool terminated_by_collision = false;

    std::uint32_t tip() const { return node_ids.back(); }
};

struct NetworkTree
{
    std::vector<Vec3> node_pos;
    std::vector<Vec3> node_dir;    ///< growth direction when the node was laid
    std::vector<Vec3> node_normal; ///< surface normal at the node
    std::vector<std::uint32_t> node_branch; ///< branch that created the node
    std::vector<Branch> branches;
    std::vector<std::uint32_t> terminal_node_ids; ///< PMJ candidates: tips of childless branches
    Real l_seg = 0;

    std::size_t nodeCount() const { return node_pos.size(); }

    bool isTerminal(std::uint32_t node) const
    {
        for (const std::uint32_t t : terminal_node_ids)
            if (t == node)
                return true;
        return false;
    }

    /// Undirected segment list (consecutive nodes within each branch chain).
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const
    {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        for (const Branch &b : branches)
            for (std::size_t k = 1; k < b.node_ids.size(); ++k)
                out.emplace_back(b.node_ids[k - 1], b.node_ids[k]);
        return out;
    }

    /// Predecessor of each node along its creating chain (root has none).
    std::vector<std::int32_t> predecessors() const
    {
        std::vector<std::int32_t> pred(nodeCount(), -1);
        for (const Branch &b : branches)
            for (std::size_t k = 1; k < b.node_ids.size(); ++k)
                pred[b.node_ids[k]] = static_cast<std::int32_t>(b.node_ids[k - 1]);
        return pred;
    }

    /// Successors of each node: next node in its chain, plus the first created
    /// node of every child branch for branch tips.
    std::vector<std::vector<std::uint32_t>> successors() const
    {
        std::vector<std::vector<std::uint32_t>> succ(nodeCount());
        for (const Branch &b : branches)
            for (std::size_t k = 1; k < b.node_ids.size(); ++k)
                succ[b.node_ids[k - 1]].push_back(b.node_ids[k]);
        return succ;
    }

    void rebuildTerminals()
    {
        terminal_node_ids.clear();
        for (const Branch &b : branches)
            if (b.children.empty() && !b.node_ids.empty())
                terminal_node_ids.push_back(b.tip());
    }
};

/// Edge-list text export: one node per line (id, x, y, z, branch, is_terminal),
/// one edge per line (id_a, id_b).
inline void saveNetworkEdgeList(const NetworkTree &tree, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open network output file: " + path);
    out.precision(17);
    const auto edges = tree.edges();
    out << "# mosph network: nodes " << tree.nodeCount() << " edges " << edges.size() << " l_seg "
        << tree.l_seg << "\n";
    out << "# n <id> <x> <y> <z> <branch> <is_terminal>\n";
    for (std::size_t i = 0; i < tree.nodeCount(); ++i)
        out << "n " << i << ' ' << tree.node_pos[i].x() << ' ' << tree.node_pos[i].y() << ' '
            << tree.node_pos[i].z() << ' ' << tree.node_branch[i] << ' '
            << (tree.isTerminal(static_cast<std::uint32_t>(i)) ? 1 : 0) << "\n";
    out << "# e <id_a> <id_b>\n";
    for (const auto &e : edges)
        out << "e " << e.first << ' ' << e.second << "\n";
}

/// Structured topology export: one branch per line with mother/children/nodes.
inline void saveNetworkTopology(const NetworkTree &tree, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open topology output file: " + path);
    out << "# mosph network topology: branches " << tree.branches.size() << "\n";
    out << "# branch <id> mother <id|-1> collision <0|1> children <k> [ids] nodes <m> [ids]\n";
    for (std::size_t b = 0; b < tree.branches.size(); ++b)
    {
        const Branch &br = tree.branches[b];
        out << "branch " << b << " mother " << br.mother << " collision "
            << (br.terminated_by_collision ? 1 : 0) << " children " << br.children.size();
        for (const auto c : br.children)
            out << ' ' << c;
        out << " nodes " << br.node_ids.size();
        for (const auto n : br.node_ids)
            out << ' ' << n;
        out << "\n";
    }
}

inline void saveNetwork(const NetworkTree &tree, const std::string &prefix)
{
    saveNetworkEdgeList(tree, prefix + ".net.txt");
    saveNetworkTopology(tree, prefix + ".topo.txt");
}

/// Loads the pair of files written by saveNetwork.
inline NetworkTree loadNetwork(const std::string &prefix)
{
    NetworkTree tree;
    {
        std::ifstream in(prefix + ".net.txt");
        if (!in)
            throw ParseError("cannot open network file: " + prefix + ".net.txt");
        std::string line;
        std::vector<std::uint32_t> terminals;
        while (std::getline(in, line))
        {
            std::istringstream ls(line);
            std::string tag;
            if (!(ls >> tag))
                continue;
            if (tag == "#")
            {
                std::string word;
                while (ls >> word)
                {
                    if (word == "l_seg")
                        ls >> tree.l_seg;
                }
                continue;
            }
            if (tag == "n")
            {
                std::uint32_t id, branch;
                int is_terminal;
                Vec3 p;
                if (!(ls >> id >> p.x() >> p.y() >> p.z() >> branch >> is_terminal))
                    throw ParseError("malformed node line: " + line);
                if (id != tree.node_pos.size())
                    throw ParseError("node ids must be dense and ordered: " + line);
                tree.node_pos.push_back(p);
                tree.node_branch.push_back(branch);
                if (is_terminal)
                    terminals.push_back(id);
            }
            // edges are implied by the topology file; "e" lines are informative
        }
        tree.terminal_node_ids = terminals;
    }
    {
        std::ifstream in(prefix + ".topo.txt");
        if (!in)
            throw ParseError("cannot open topology file: " + prefix + ".topo.txt");
        std::string line;
        while (std::getline(in, line))
        {
            std::istringstream ls(line);
            std::string tag;
            if (!(ls >> tag) || tag == "#")
                continue;
            if (tag != "branch")
                throw ParseError("malformed topology line: " + line);
            std::size_t id;
            std::string kw;
            Branch br;
            std::size_t n_children = 0, n_nodes = 0;
            int collision = 0;
            if (!(ls >> id >> kw >> br.mother) || kw != "mother")
                throw ParseError("malformed topology line: " + line);
            if (!(ls >> kw >> collision) || kw != "collision")
                throw ParseError("malformed topology line: " + line);
            br.terminated_by_collision = collision != 0;
            if (!(ls >> kw >> n_children) || kw != "children")
                throw ParseError("malformed topology line: " + line);
            br.children.resize(n_children);
            for (auto &c : br.children)
                if (!(ls >> c))
                    throw ParseError("malformed topology line: " + line);
            if (!(ls >> kw >> n_nodes) || kw != "nodes")
                throw ParseError("malformed topology line: " + line);
            br.node_ids.resize(n_nodes);
            for (auto &n : br.node_ids)
                if (!(ls >> n))
                    throw ParseError("malformed topology line: " + line);
            if (id != tree.branches.size())
                throw ParseError("branch ids must be dense and ordered: " + line);
            tree.branches.push_back(std::move(br));
        }
    }
    tree.node_dir.assign(tree.nodeCount(), Vec3::Zero());
    tree.node_normal.assign(tree.nodeCount(), Vec3::Zero());
    if (tree.l_seg <= 0 && tree.nodeCount() >= 2)
    {
        // fall back to the first segment length
        for (const Branch &b : tree.branches)
            if (b.node_ids.size() >= 2)
            {
                tree.l_seg = (tree.node_pos[b.node_ids[1]] - tree.node_pos[b.node_ids[0]]).norm();
                break;
            }
    }
    return tree;
}

} // namespace mosph
#endif // MOSPH_NETWORK_HPP
