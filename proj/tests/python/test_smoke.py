import math

import pytest

import fograncache as fgc


def build_small():
    net = fgc.build_grid_topology(2, 6, 150.0, 200.0, 7)
    demand = fgc.zipf_preferences(8, [0.8] * 6, 7)
    demand.file_bits = 1e8
    ch = fgc.ChannelParams()
    ch.mc_samples = 2000
    ch.mc_seed = 99
    gains = fgc.build_link_gains(net, ch)
    table = fgc.build_rate_table(net, gains, ch, fgc.Scheme.COOPERATIVE_BEAMFORMING)
    ctx = fgc.DelayContext(net, demand, table, fgc.Scheme.COOPERATIVE_BEAMFORMING)
    return net, demand, table, ctx


def test_topology_and_demand():
    net, demand, _, _ = build_small()
    assert net.num_bs == 2 and net.num_users == 6
    for k in range(6):
        assert len(net.serving_sets[k]) >= 1
        assert math.isclose(sum(demand.preferences[k]), 1.0, rel_tol=1e-12)


def test_closed_form_rate_matches_mc():
    ch = fgc.ChannelParams()
    ch.mc_samples = 200000
    ch.mc_seed = 5
    closed = fgc.expected_rate_closed(1.0, ch)
    mc = fgc.expected_rate_mc([1.0], ch, 5)
    assert abs(closed - mc) / closed < 0.01


def test_greedy_beats_empty_and_is_feasible():
    net, demand, table, ctx = build_small()
    caps = [2, 2]
    empty = fgc.objective(fgc.Placement(8, 2, caps), ctx)
    res = fgc.greedy_place_lazy(ctx, caps)
    filled = fgc.objective(res.placement, ctx)
    assert res.placement.feasible()
    assert filled.average_delay_s < empty.average_delay_s
    assert all(load <= 2 for load in res.placement.load)


def test_bp_close_to_greedy():
    net, demand, table, ctx = build_small()
    caps = [2, 2]
    graph = fgc.build_factor_graph(net, demand)
    opts = fgc.BPOptions()
    bp = fgc.bp_solve(graph, ctx, caps, opts)
    greedy = fgc.greedy_place_lazy(ctx, caps)
    d_bp = fgc.objective(bp.placement, ctx).average_delay_s
    d_gr = fgc.objective(greedy.placement, ctx).average_delay_s
    assert bp.placement.feasible()
    assert d_bp <= 1.10 * d_gr


def test_sweep_rows_and_determinism():
    config = """
    bs = 2
    users = 6
    files = 8
    gamma = 0.8
    seed = 7
    mc_samples = 2000
    strategies = greedy-cotc,gpc
    sweep_q = 1,2
    """
    first = fgc.run_sweep(config)
    second = fgc.run_sweep(config)
    assert first["csv"] == second["csv"]
    assert len(first["rows"]) == 4
    delays = {
        (r["sweep_value"], r["strategy"]): r["avg_delay_s"] for r in first["rows"]
    }
    assert delays[(2.0, "greedy-cotc")] <= delays[(1.0, "greedy-cotc")] + 1e-12


def test_config_errors_raise():
    with pytest.raises(ValueError):
        fgc.run_sweep("strategies = \n")
    with pytest.raises(ValueError):
        fgc.run_sweep("strategies = warmest-files\n")
