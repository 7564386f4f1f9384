#include "d2dalloc/model.hpp"

#include <algorithm>
#include <cmath>

namespace d2dalloc {

namespace {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

void Scenario::validate() const {
    if (n_uc < 0 || n_dc < 0 || n_d < 0 || m_u < 0 || m_d < 0)
        fail("scenario: negative counts");
    const int n = num_links();
    if (n <= 0) fail("scenario: no links");
    if (n > 64) fail("scenario: more than 64 links is not supported");
    if (static_cast<int>(links.size()) != n)
        fail("scenario: links size does not match counts");
    if (m_u < n_uc)
        fail("scenario: fewer uplink channels than uplink cellular links");
    if (m_d < n_dc)
        fail("scenario: fewer downlink channels than downlink cellular links");
    if (!(noise_w > 0.0) || !std::isfinite(noise_w))
        fail("scenario: noise_w must be positive and finite");
    if (bs_total_power_w < 0.0 || !std::isfinite(bs_total_power_w))
        fail("scenario: bs_total_power_w must be non-negative and finite");
    if (num_nodes < 1) fail("scenario: num_nodes must be at least 1");

    for (int j = 1; j <= n; ++j) {
        const Link& l = links[static_cast<std::size_t>(j - 1)];
        if (l.id != j) fail("scenario: link ids must be 1..N in order");
        const LinkKind expected = is_uplink_cellular(j)
                                      ? LinkKind::UplinkCellular
                                  : is_downlink_cellular(j)
                                      ? LinkKind::DownlinkCellular
                                      : LinkKind::D2D;
        if (l.kind != expected)
            fail("scenario: link " + std::to_string(j) +
                 " kind does not match its id range");
        if (!(l.weight >= 0.0) || !std::isfinite(l.weight))
            fail("scenario: link weight must be non-negative and finite");
        if (!(l.sinr_min > 0.0) || !std::isfinite(l.sinr_min))
            fail("scenario: sinr_min must be positive and finite");
        if (l.kind == LinkKind::D2D) {
            if (l.tx_device == l.rx_device)
                fail("scenario: D2D link with identical endpoints");
            if (l.tx_device == kBaseStation || l.rx_device == kBaseStation)
                fail("scenario: D2D endpoint cannot be the base station");
            if (l.tx_device < 0 || l.tx_device >= num_nodes ||
                l.rx_device < 0 || l.rx_device >= num_nodes)
                fail("scenario: D2D endpoint out of node range");
        } else {
            if (l.device <= kBaseStation || l.device >= num_nodes)
                fail("scenario: cellular device out of node range");
        }
    }

    if (static_cast<int>(gains.size()) != num_channels())
        fail("scenario: need one gain table per channel");
    const std::size_t cells =
        static_cast<std::size_t>(num_nodes) * static_cast<std::size_t>(num_nodes);
    for (const auto& table : gains) {
        if (table.size() != cells) fail("scenario: gain table has wrong shape");
        for (double g : table)
            if (!(g >= 0.0) || !std::isfinite(g))
                fail("scenario: gains must be finite and non-negative");
    }
    if (!positions.empty() && static_cast<int>(positions.size()) != num_nodes)
        fail("scenario: positions, when present, must cover every node");
}

Assignment Assignment::empty_for(const Scenario& s) {
    Assignment a;
    a.on_channel.assign(static_cast<std::size_t>(s.num_channels()), 0);
    for (LinkId j = 1; j <= s.num_cellular(); ++j)
        a.cellular_mode |= link_bit(j);
    return a;
}

std::vector<ChannelId> Assignment::channels_of(LinkId j) const {
    std::vector<ChannelId> out;
    for (std::size_t i = 0; i < on_channel.size(); ++i)
        if (mask_has(on_channel[i], j)) out.push_back(static_cast<ChannelId>(i + 1));
    return out;
}

bool Assignment::active(LinkId j) const {
    for (LinkMask occ : on_channel)
        if (mask_has(occ, j)) return true;
    return false;
}

CoChannelSets co_channel_sets(const Assignment& a, ChannelId i) {
    const LinkMask occ = a.on_channel[static_cast<std::size_t>(i - 1)];
    return {occ & a.cellular_mode, occ & ~a.cellular_mode};
}

TxRx tx_rx_nodes(const Scenario& s, LinkId j, bool cellular_mode, ChannelId i) {
    const Link& l = s.link(j);
    switch (l.kind) {
    case LinkKind::UplinkCellular:
        if (!cellular_mode || !s.is_uplink_channel(i))
            fail("tx_rx_nodes: uplink cellular link needs x=1 and an uplink channel");
        return {l.device, kBaseStation};
    case LinkKind::DownlinkCellular:
        if (!cellular_mode || !s.is_downlink_channel(i))
            fail("tx_rx_nodes: downlink cellular link needs x=1 and a downlink channel");
        return {kBaseStation, l.device};
    case LinkKind::D2D:
        if (!cellular_mode) return {l.tx_device, l.rx_device};
        return s.is_uplink_channel(i) ? TxRx{l.tx_device, kBaseStation}
                                      : TxRx{kBaseStation, l.rx_device};
    }
    fail("tx_rx_nodes: unreachable");
    return {};
}

bool placement_legal(const Scenario& s, LinkId j, bool cellular_mode,
                     ChannelId i) {
    if (i < 1 || i > s.num_channels()) return false;
    switch (s.link(j).kind) {
    case LinkKind::UplinkCellular:
        return cellular_mode && s.is_uplink_channel(i);
    case LinkKind::DownlinkCellular:
        return cellular_mode && s.is_downlink_channel(i);
    case LinkKind::D2D:
        return true;
    }
    return false;
}

double tx_power(const Scenario& s, LinkId j, bool cellular_mode, ChannelId i) {
    const Link& l = s.link(j);
    if (l.kind == LinkKind::D2D && !cellular_mode) return l.power_d2d_w;
    // x=1 side: the BS transmits on downlink channels, the device on uplink.
    if (s.is_downlink_channel(i)) return s.bs_power_per_downlink_w();
    return l.power_cellular_w;
}

double sinr(const Scenario& s, ChannelId i, LinkMask lc, LinkMask ld, LinkId j,
            bool x_j) {
    if (!mask_has(x_j ? lc : ld, j))
        fail("sinr: link is not in the occupant set matching its mode");
    const TxRx own = tx_rx_nodes(s, j, x_j, i);
    const double numer = tx_power(s, j, x_j, i) * s.gain(i, own.tx, own.rx);
    double denom = s.noise_w;
    for (LinkMask rest = (lc | ld) & ~link_bit(j); rest != 0;) {
        const LinkId z = pop_lowest(rest);
        const bool x_z = mask_has(lc, z);
        const TxRx zt = tx_rx_nodes(s, z, x_z, i);
        denom += tx_power(s, z, x_z, i) * s.gain(i, zt.tx, own.rx);
    }
    return numer / denom;
}

namespace {

// Occupant sets with any illegally placed member dropped; broken placements
// are reported as structural violations and must not poison SINR terms.
CoChannelSets sanitized_sets(const Scenario& s, const Assignment& a,
                             ChannelId i) {
    CoChannelSets cs = co_channel_sets(a, i);
    CoChannelSets out;
    for (LinkMask m = cs.lc; m != 0;) {
        const LinkId z = pop_lowest(m);
        if (placement_legal(s, z, true, i)) out.lc |= link_bit(z);
    }
    for (LinkMask m = cs.ld; m != 0;) {
        const LinkId z = pop_lowest(m);
        if (placement_legal(s, z, false, i)) out.ld |= link_bit(z);
    }
    return out;
}

}  // namespace

double effective_sinr(const Scenario& s, const Assignment& a, LinkId j) {
    const bool x_j = a.mode(j);
    double up = 0.0, down = 0.0;
    for (ChannelId i : a.channels_of(j)) {
        if (!placement_legal(s, j, x_j, i)) continue;
        const CoChannelSets cs = sanitized_sets(s, a, i);
        const double xi = sinr(s, i, cs.lc, cs.ld, j, x_j);
        (s.is_uplink_channel(i) ? up : down) += xi;
    }
    if (s.is_d2d(j) && x_j) return std::min(up, down);
    return up + down;
}

double link_rate(const Scenario& s, const Assignment& a, LinkId j) {
    if (!a.active(j)) return 0.0;
    return std::log2(1.0 + effective_sinr(s, a, j));
}

double objective(const Scenario& s, const Assignment& a) {
    double total = 0.0;
    for (LinkId j = 1; j <= s.num_links(); ++j)
        total += s.link(j).weight * link_rate(s, a, j);
    return total;
}

const char* constraint_name(Constraint c) {
    switch (c) {
    case Constraint::CellularQos: return "cellular_qos";
    case Constraint::D2dQos: return "d2d_qos";
    case Constraint::OneCellularPerChannel: return "one_cellular_per_channel";
    case Constraint::CellularOneChannel: return "cellular_one_channel";
    case Constraint::D2dModeOneChannel: return "d2d_mode_one_channel";
    case Constraint::CellularModePair: return "cellular_mode_channel_pair";
    case Constraint::DirectionMatch: return "direction_match";
    }
    return "unknown";
}

bool FeasibilityReport::has(Constraint c) const {
    return std::any_of(violations.begin(), violations.end(),
                       [c](const Violation& v) { return v.constraint == c; });
}

FeasibilityReport check_feasible(const Scenario& s, const Assignment& a) {
    const int n = s.num_links();
    const int m = s.num_channels();
    if (static_cast<int>(a.on_channel.size()) != m)
        fail("check_feasible: assignment channel count mismatch");
    for (LinkId j = 1; j <= s.num_cellular(); ++j)
        if (!a.mode(j)) fail("check_feasible: cellular link with x=0");
    if ((a.cellular_mode & ~s.all_links_mask()) != 0)
        fail("check_feasible: mode flag outside the link range");

    FeasibilityReport rep;
    auto add = [&rep](Constraint c, LinkId j, ChannelId i) {
        rep.violations.push_back({c, j, i});
    };

    for (ChannelId i = 1; i <= m; ++i) {
        const CoChannelSets cs = co_channel_sets(a, i);
        if (std::popcount(cs.lc) > 1)
            add(Constraint::OneCellularPerChannel, 0, i);
    }

    for (LinkId j = 1; j <= n; ++j) {
        const std::vector<ChannelId> chans = a.channels_of(j);
        if (s.is_cellular(j)) {
            const bool wants_uplink = s.is_uplink_cellular(j);
            for (ChannelId i : chans)
                if (s.is_uplink_channel(i) != wants_uplink)
                    add(Constraint::DirectionMatch, j, i);
            if (chans.size() != 1) add(Constraint::CellularOneChannel, j, 0);
            if (effective_sinr(s, a, j) < s.link(j).sinr_min)
                add(Constraint::CellularQos, j, 0);
        } else if (!a.mode(j)) {
            if (chans.size() > 1) add(Constraint::D2dModeOneChannel, j, 0);
            if (!chans.empty() &&
                effective_sinr(s, a, j) < s.link(j).sinr_min)
                add(Constraint::D2dQos, j, 0);
        } else {
            int up = 0, down = 0;
            for (ChannelId i : chans)
                (s.is_uplink_channel(i) ? up : down) += 1;
            if (up > 1 || down > 1 || up != down)
                add(Constraint::CellularModePair, j, 0);
            if (!chans.empty() &&
                effective_sinr(s, a, j) < s.link(j).sinr_min)
                add(Constraint::D2dQos, j, 0);
        }
    }
    return rep;
}

}  // namespace d2dalloc
