#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace d2dalloc {

// Node 0 is the base station; user devices are numbered from 1.
using NodeId = int;
// Links are numbered 1..N: uplink cellular first, then downlink cellular,
// then D2D pairs.
using LinkId = int;
// Channels are numbered 1..M: uplink channels are 1..m_u, downlink channels
// are m_u+1..m_u+m_d.
using ChannelId = int;

inline constexpr NodeId kBaseStation = 0;

// Bit mask over link ids (bit j-1 stands for link j). Caps instances at 64
// links, which is far beyond what the exact solvers can handle anyway.
using LinkMask = std::uint64_t;
// Bit mask over downlink channels (bit 0 stands for channel m_u+1).
using ChannelMask = std::uint64_t;

inline constexpr LinkMask link_bit(LinkId j) {
    return LinkMask{1} << (j - 1);
}

inline constexpr bool mask_has(LinkMask m, LinkId j) {
    return (m >> (j - 1)) & 1;
}

// Pops the lowest link id out of a non-empty mask.
inline LinkId pop_lowest(LinkMask& m) {
    const LinkId j = std::countr_zero(m) + 1;
    m &= m - 1;
    return j;
}

enum class LinkKind { UplinkCellular, DownlinkCellular, D2D };

struct Link {
    LinkId id = 0;
    LinkKind kind = LinkKind::D2D;
    NodeId device = 0;     // cellular kinds: the user device
    NodeId tx_device = 0;  // D2D kind: transmitter device
    NodeId rx_device = 0;  // D2D kind: receiver device
    double power_cellular_w = 0.0;  // uplink-hop transmit power
    double power_d2d_w = 0.0;       // direct-mode transmit power (D2D only)
    double weight = 1.0;
    double sinr_min = 1.0;  // linear ratio, > 0
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// An immutable problem instance: link population, channel partition, noise,
// and one dense node-to-node power gain table per channel. Every direct and
// interference gain is resolved through the transmitting/receiving node pair
// of the involved links, so a single table per channel covers all cases.
//
// Treated as read-only after construction; all operations below are pure and
// safe to call concurrently on the same instance.
struct Scenario {
    int n_uc = 0;  // uplink cellular links
    int n_dc = 0;  // downlink cellular links
    int n_d = 0;   // D2D links
    int m_u = 0;   // uplink channels
    int m_d = 0;   // downlink channels
    double noise_w = 1e-13;          // receiver noise power (watts)
    double bs_total_power_w = 0.0;   // split equally across downlink channels
    std::vector<Link> links;         // links[j-1]
    int num_nodes = 1;
    // gains[i-1] is a flattened num_nodes x num_nodes matrix in tx-major
    // order: gain on channel i from node a to node b = gains[i-1][a*num_nodes+b].
    std::vector<std::vector<double>> gains;
    std::vector<Point> positions;    // optional, informational

    int num_links() const { return n_uc + n_dc + n_d; }
    int num_cellular() const { return n_uc + n_dc; }
    int num_channels() const { return m_u + m_d; }

    bool is_uplink_channel(ChannelId i) const { return i >= 1 && i <= m_u; }
    bool is_downlink_channel(ChannelId i) const {
        return i > m_u && i <= m_u + m_d;
    }
    bool is_cellular(LinkId j) const { return j >= 1 && j <= num_cellular(); }
    bool is_uplink_cellular(LinkId j) const { return j >= 1 && j <= n_uc; }
    bool is_downlink_cellular(LinkId j) const {
        return j > n_uc && j <= num_cellular();
    }
    bool is_d2d(LinkId j) const {
        return j > num_cellular() && j <= num_links();
    }

    const Link& link(LinkId j) const {
        return links[static_cast<std::size_t>(j - 1)];
    }
    double gain(ChannelId i, NodeId tx, NodeId rx) const {
        return gains[static_cast<std::size_t>(i - 1)]
                    [static_cast<std::size_t>(tx) * num_nodes + rx];
    }
    double bs_power_per_downlink_w() const {
        return m_d > 0 ? bs_total_power_w / m_d : 0.0;
    }

    LinkMask all_links_mask() const {
        const int n = num_links();
        return n == 64 ? ~LinkMask{0} : (LinkMask{1} << n) - 1;
    }
    LinkMask d2d_links_mask() const {
        return all_links_mask() & ~((LinkMask{1} << num_cellular()) - 1);
    }

    // Throws std::invalid_argument on any broken invariant (counts, channel
    // partition, gain table shape, link ordering, node references).
    void validate() const;
};

// Decision variables: per-channel link incidence (rho) and per-link mode
// flags (x). x_j is 1 for every cellular link and for D2D links selected
// into cellular mode; structural rules are enforced by check_feasible, not
// by this container.
struct Assignment {
    std::vector<LinkMask> on_channel;  // on_channel[i-1]: links with rho=1
    LinkMask cellular_mode = 0;        // bit j-1 set iff x_j = 1

    // Empty assignment with the mandatory x=1 flags for cellular links.
    static Assignment empty_for(const Scenario& s);

    bool assigned(ChannelId i, LinkId j) const {
        return mask_has(on_channel[static_cast<std::size_t>(i - 1)], j);
    }
    void set(ChannelId i, LinkId j) {
        on_channel[static_cast<std::size_t>(i - 1)] |= link_bit(j);
    }
    bool mode(LinkId j) const { return mask_has(cellular_mode, j); }
    void set_mode(LinkId j, bool cellular) {
        if (cellular)
            cellular_mode |= link_bit(j);
        else
            cellular_mode &= ~link_bit(j);
    }
    std::vector<ChannelId> channels_of(LinkId j) const;
    bool active(LinkId j) const;

    bool operator==(const Assignment&) const = default;
};

// Per-channel occupant split: lc holds the x=1 occupants (cellular links and
// cellular-mode D2D links), ld the D2D-mode occupants.
struct CoChannelSets {
    LinkMask lc = 0;
    LinkMask ld = 0;
};

CoChannelSets co_channel_sets(const Assignment& a, ChannelId i);

struct TxRx {
    NodeId tx = 0;
    NodeId rx = 0;
};

// Transmitting and receiving node of link j on channel i given its mode.
// Uplink cellular: device -> BS. Downlink cellular: BS -> device. D2D mode:
// tx_device -> rx_device on either channel direction. Cellular-mode D2D:
// tx_device -> BS on an uplink channel, BS -> rx_device on a downlink one.
// Throws std::invalid_argument when the channel direction is illegal for
// the (link, mode) pair.
TxRx tx_rx_nodes(const Scenario& s, LinkId j, bool cellular_mode, ChannelId i);

// True when (link, mode, channel) is a legal placement (tx_rx_nodes would
// not throw).
bool placement_legal(const Scenario& s, LinkId j, bool cellular_mode,
                     ChannelId i);

// Transmit power of link j on channel i: p_d2d for D2D mode, p_cellular for
// the device-side (uplink) transmissions, and the equal BS power split for
// any downlink-channel transmission.
double tx_power(const Scenario& s, LinkId j, bool cellular_mode, ChannelId i);

// Received SINR of link j on channel i given the co-channel occupant sets.
// j must itself be a member of lc (x=1) or ld (x=0); every other occupant
// must be legally placed on this channel.
double sinr(const Scenario& s, ChannelId i, LinkMask lc, LinkMask ld, LinkId j,
            bool x_j);

// SINR aggregated over the link's assigned channels: a plain sum for
// cellular and D2D-mode links (one term in practice), the minimum of the
// uplink and downlink hop SINRs for a cellular-mode D2D link. Channels where
// the placement is illegal are skipped; those show up as structural
// violations instead.
double effective_sinr(const Scenario& s, const Assignment& a, LinkId j);

// log2(1 + effective SINR); zero for a link with no channel. Unweighted.
double link_rate(const Scenario& s, const Assignment& a, LinkId j);

// Weighted sum rate over all links.
double objective(const Scenario& s, const Assignment& a);

enum class Constraint {
    CellularQos,            // cellular link meets its SINR floor
    D2dQos,                 // active D2D link meets its SINR floor
    OneCellularPerChannel,  // at most one x=1 occupant per channel
    CellularOneChannel,     // cellular link holds exactly one channel
    D2dModeOneChannel,      // D2D-mode link holds at most one channel
    CellularModePair,       // cellular-mode D2D holds one uplink + one
                            // downlink channel, or none at all
    DirectionMatch,         // cellular links stay in their own direction
};

const char* constraint_name(Constraint c);

struct Violation {
    Constraint constraint;
    LinkId link = 0;       // 0 when not tied to a single link
    ChannelId channel = 0; // 0 when not tied to a single channel
};

struct FeasibilityReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    bool has(Constraint c) const;
};

// Full feasibility check: QoS floors for cellular and active D2D links plus
// all structural channel-occupancy rules. Violations are data, not errors;
// the report lists every one found.
FeasibilityReport check_feasible(const Scenario& s, const Assignment& a);

struct SolveStats {
    std::uint64_t states_visited = 0;
    std::uint64_t decisions_enumerated = 0;
    double wall_time_ms = 0.0;
    bool state_bound_ok = true;
};

// What every solver returns. objective and per_link_rate are meaningful only
// when feasible is true; solvers re-verify the reported objective against
// the recomputed one before returning.
struct SolveResult {
    Assignment assignment;
    double objective = 0.0;
    std::vector<double> per_link_rate;  // per_link_rate[j-1]
    bool feasible = false;
    SolveStats stats;
};

// Thrown when an instance is too large for a solver's enumeration or state
// budget. Carries the pre-enumeration size estimate that tripped the guard.
class BudgetError : public std::runtime_error {
  public:
    BudgetError(const std::string& what, double estimate)
        : std::runtime_error(what), estimate_(estimate) {}
    double estimate() const { return estimate_; }

  private:
    double estimate_;
};

}  // namespace d2dalloc
