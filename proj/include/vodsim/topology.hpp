#pragma once

// Delivery hierarchy: one main server (MMS), a ring of trackers (one per
// LPSG), a ring of proxy servers per LPSG, and a client group per proxy.
// The topology is immutable after build; rings are implicit in index
// arithmetic.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vodsim {

enum class NodeKind : uint8_t { MMS, TR, PS, CLIENT };

struct NodeId {
  NodeKind kind = NodeKind::MMS;
  int lpsg = -1;    // tracker / group index p
  int ps = -1;      // proxy index q within the group
  int client = -1;  // client index within the proxy's group

  static NodeId mms() { return {NodeKind::MMS, -1, -1, -1}; }
  static NodeId tr(int p) { return {NodeKind::TR, p, -1, -1}; }
  static NodeId proxy(int p, int q) { return {NodeKind::PS, p, q, -1}; }
  static NodeId client_node(int p, int q, int c) { return {NodeKind::CLIENT, p, q, c}; }

  friend bool operator==(const NodeId&, const NodeId&) = default;

  std::string label() const {
    switch (kind) {
      case NodeKind::MMS: return "MMS";
      case NodeKind::TR: return "TR" + std::to_string(lpsg);
      case NodeKind::PS: return "PS" + std::to_string(lpsg) + "." + std::to_string(ps);
      case NodeKind::CLIENT:
        return "C" + std::to_string(lpsg) + "." + std::to_string(ps) + "." +
               std::to_string(client);
    }
    return "?";
  }
};

enum class LinkClass : uint8_t {
  PS_CLIENT = 0,
  CLIENT_CLIENT = 1,
  TR_PS = 2,
  PS_PS = 3,
  TR_TR = 4,
  MMS_TR = 5,
};
inline constexpr std::size_t kLinkClassCount = 6;

inline const char* link_class_name(LinkClass c) {
  switch (c) {
    case LinkClass::PS_CLIENT: return "PS-CLIENT";
    case LinkClass::CLIENT_CLIENT: return "CLIENT-CLIENT";
    case LinkClass::TR_PS: return "TR-PS";
    case LinkClass::PS_PS: return "PS-PS";
    case LinkClass::TR_TR: return "TR-TR";
    case LinkClass::MMS_TR: return "MMS-TR";
  }
  return "?";
}

struct LinkParams {
  double delay_ms = 0;  // one-way setup delay
  int capacity = 1;     // max concurrent streams per link instance
};

struct LinkTable {
  std::array<LinkParams, kLinkClassCount> params{};

  LinkParams& at(LinkClass c) { return params[static_cast<std::size_t>(c)]; }
  const LinkParams& at(LinkClass c) const { return params[static_cast<std::size_t>(c)]; }

  void validate() const {
    for (const LinkParams& p : params) {
      if (p.delay_ms < 0) throw std::invalid_argument("link delay must be >= 0");
      if (p.capacity < 1) throw std::invalid_argument("link capacity must be >= 1");
    }
  }
};

inline LinkTable default_link_table() {
  LinkTable t;
  t.at(LinkClass::PS_CLIENT) = {100.0, 200};
  t.at(LinkClass::CLIENT_CLIENT) = {100.0, 4};
  t.at(LinkClass::TR_PS) = {100.0, 50};
  t.at(LinkClass::PS_PS) = {100.0, 50};
  t.at(LinkClass::TR_TR) = {300.0, 30};
  t.at(LinkClass::MMS_TR) = {1200.0, 30};
  return t;
}

class Topology {
 public:
  Topology() = default;
  Topology(int j_lpsgs, int ps_per_lpsg, int clients_per_ps, LinkTable links)
      : j_(j_lpsgs), m_(ps_per_lpsg), c_(clients_per_ps), links_(links) {}

  int j_lpsgs() const { return j_; }
  int ps_per_lpsg() const { return m_; }
  int clients_per_ps() const { return c_; }
  const LinkTable& links() const { return links_; }

  long node_count() const {
    return 1L + j_ + static_cast<long>(j_) * m_ + static_cast<long>(j_) * m_ * c_;
  }

  NodeId tr(int p) const { return NodeId::tr(check_lpsg(p)); }
  NodeId proxy(int p, int q) const {
    check_lpsg(p);
    check_ps(q);
    return NodeId::proxy(p, q);
  }
  NodeId client(int p, int q, int c) const {
    check_lpsg(p);
    check_ps(q);
    if (c < 0 || c >= c_) throw std::invalid_argument("client index out of range");
    return NodeId::client_node(p, q, c);
  }

  NodeId parent_ps(const NodeId& client) const {
    if (client.kind != NodeKind::CLIENT)
      throw std::invalid_argument("parent_ps: node is not a client");
    return proxy(client.lpsg, client.ps);
  }

  /// Ring neighbors of tracker p, nearest first; both neighbors are one hop
  /// away, so ties fall back to the lower index. Self and duplicates are
  /// dropped (a ring of one has no distinct neighbor).
  std::vector<int> tr_ring_neighbors(int p) const {
    check_lpsg(p);
    std::vector<int> out;
    const int left = (p + j_ - 1) % j_;
    const int right = (p + 1) % j_;
    for (int n : {std::min(left, right), std::max(left, right)}) {
      if (n == p) continue;
      if (!out.empty() && out.back() == n) continue;
      out.push_back(n);
    }
    return out;
  }

  std::vector<int> ps_ring_neighbors(int p, int q) const {
    check_lpsg(p);
    check_ps(q);
    std::vector<int> out;
    const int left = (q + m_ - 1) % m_;
    const int right = (q + 1) % m_;
    for (int n : {std::min(left, right), std::max(left, right)}) {
      if (n == q) continue;
      if (!out.empty() && out.back() == n) continue;
      out.push_back(n);
    }
    return out;
  }

  int global_ps_index(int p, int q) const {
    check_lpsg(p);
    check_ps(q);
    return p * m_ + q;
  }
  int global_client_index(int p, int q, int c) const {
    check_lpsg(p);
    check_ps(q);
    if (c < 0 || c >= c_) throw std::invalid_argument("client index out of range");
    return (p * m_ + q) * c_ + c;
  }
  int global_ps_index(const NodeId& n) const { return global_ps_index(n.lpsg, n.ps); }
  int global_client_index(const NodeId& n) const {
    return global_client_index(n.lpsg, n.ps, n.client);
  }

  bool contains(const NodeId& n) const {
    switch (n.kind) {
      case NodeKind::MMS: return true;
      case NodeKind::TR: return n.lpsg >= 0 && n.lpsg < j_;
      case NodeKind::PS: return n.lpsg >= 0 && n.lpsg < j_ && n.ps >= 0 && n.ps < m_;
      case NodeKind::CLIENT:
        return n.lpsg >= 0 && n.lpsg < j_ && n.ps >= 0 && n.ps < m_ && n.client >= 0 &&
               n.client < c_;
    }
    return false;
  }

 private:
  int check_lpsg(int p) const {
    if (p < 0 || p >= j_) throw std::invalid_argument("lpsg index out of range");
    return p;
  }
  int check_ps(int q) const {
    if (q < 0 || q >= m_) throw std::invalid_argument("ps index out of range");
    return q;
  }

  int j_ = 0, m_ = 0, c_ = 0;
  LinkTable links_{};
};

inline Topology build_topology(int j_lpsgs, int ps_per_lpsg, int clients_per_ps,
                               LinkTable links = default_link_table()) {
  if (j_lpsgs < 1 || ps_per_lpsg < 1 || clients_per_ps < 1)
    throw std::invalid_argument("build_topology: all counts must be >= 1");
  links.validate();
  return Topology(j_lpsgs, ps_per_lpsg, clients_per_ps, links);
}

inline double path_delay(const Topology& topo, std::span<const LinkClass> hops) {
  double total = 0;
  for (LinkClass c : hops) total += topo.links().at(c).delay_ms;
  return total;
}

}  // namespace vodsim
