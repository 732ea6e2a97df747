from pathlib import Path

import numpy as np
import pytest

import socialplan as sp
from socialplan import tracks as tk
from socialplan import workflows
from socialplan.scenarios import fixture_scenario, write_scenario_config

DATA = Path(__file__).parent / "data"
HEADER = "track_id,frame_id,timestamp_ms,x,y,vx,vy"


def test_load_empty_body(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text(HEADER + "\n")
    assert tk.load_tracks(f) == {}


def test_load_mini_fixture():
    tracks = tk.load_tracks(DATA / "mini_tracks.csv")
    assert list(tracks) == [7]
    assert len(tracks[7]) == 2
    assert tracks[7][0].speed == 5.0


def test_non_monotone_frames_named_row(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text(
        HEADER + "\n"
        "1,0,0,0.0,0.0,1.0,0.0\n"
        "1,2,200,1.0,0.0,1.0,0.0\n"
        "1,1,100,2.0,0.0,1.0,0.0\n"
    )
    with pytest.raises(sp.ParseError) as err:
        tk.load_tracks(f)
    assert "row 4" in str(err.value)


def test_bad_value_is_parse_error(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text(HEADER + "\n1,0,0,abc,0.0,1.0,0.0\n")
    with pytest.raises(sp.ParseError):
        tk.load_tracks(f)


def test_inconsistent_frame_period(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text(
        HEADER + "\n"
        "1,0,0,0.0,0.0,1.0,0.0\n1,1,100,1.0,0.0,1.0,0.0\n1,2,350,2.0,0.0,1.0,0.0\n"
    )
    with pytest.raises(sp.ParseError):
        tk.load_tracks(f)


def _mutations(header):
    cols = header.split(",")
    muts = [
        ",".join(cols[1:]),                      # drop first column
        ",".join(cols[:-1]),                     # drop last column
        ",".join(cols).upper(),                  # case change
        ",".join(reversed(cols)),                # reorder
        ",".join(cols) + ",extra",               # extra column
        ";".join(cols),                          # wrong separator
        "",                                      # empty header
        ",".join(cols).replace("x", "pos_x"),    # rename
    ]
    for i in range(len(cols)):
        swapped = cols[:]
        swapped[i] = swapped[i] + "_"
        muts.append(",".join(swapped))
    for i in range(1, len(cols)):
        rotated = cols[i:] + cols[:i]
        muts.append(",".join(rotated))
    return muts[:20]


def test_header_fuzz_rejected(tmp_path):
    muts = _mutations(HEADER)
    assert len(muts) == 20
    for i, bad in enumerate(muts):
        f = tmp_path / f"bad{i}.csv"
        f.write_text(bad + "\n1,0,0,0.0,0.0,1.0,0.0\n")
        with pytest.raises(sp.SchemaError):
            tk.load_tracks(f)


def test_path_csv_roundtrip(tmp_path):
    path = sp.ReferencePath.from_points([(0, 0), (3.5, 1.25), (10, 0)], 8.0)
    f = tmp_path / "p.csv"
    tk.write_path_csv(f, path)
    loaded = tk.load_path_csv(f, 8.0)
    assert np.allclose(loaded.points, path.points, atol=1e-6)
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n0,0\n1,1\n")
    with pytest.raises(sp.SchemaError):
        tk.load_path_csv(bad, 8.0)


def test_path_csv_too_short(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("x,y\n1.0,2.0\n")
    with pytest.raises(sp.ParseError):
        tk.load_path_csv(f, 8.0)


def _fixture(tmp_path, name="courtesy", lam=None, seed=0):
    scn = fixture_scenario(name)
    cfg = write_scenario_config(scn, tmp_path / "template", seed=seed)
    lam = lam or sp.RewardWeights.courtesy()
    out = tmp_path / "fixture"
    cfg_path = workflows.make_fixture(cfg, lam, seed=seed, out_dir=out)
    return cfg_path, out, scn


def test_fixture_roundtrip_recovers_states(tmp_path):
    cfg_path, out, scn = _fixture(tmp_path)
    tracks = tk.load_tracks(out / "tracks.csv")
    pairs = tk.extract_pairs(tracks, [scn.path_ego], [scn.path_other])
    assert len(pairs) == 1
    pair = pairs[0]
    assert (pair.ego_id, pair.other_id) == (0, 1)

    # projected states must match the original simulation to 1e-6 m
    trace = sp.simulate(
        scn, sp.PolicySpec.fixed(sp.RewardWeights.courtesy()), sp.PolicySpec.follower(), max_steps=400
    )
    obs = tk.resample_pair(tracks, pair, scn.sampler.dt)
    s_sim = np.array([js.ego.s for js in trace.joint_states])
    n = min(len(s_sim), len(obs.ego.s))
    assert np.max(np.abs(obs.ego.s[:n] - s_sim[:n])) < 1e-6
    assert np.max(np.abs(obs.ego.d[:n])) < 1e-6
    xy_sim = scn.path_ego.position(s_sim, 0.0)
    assert np.max(np.abs(obs.ego.xy[:n] - xy_sim[:n])) < 1e-6


def test_fixture_deterministic_bytes(tmp_path):
    _, out_a, _ = _fixture(tmp_path / "a", seed=3)
    _, out_b, _ = _fixture(tmp_path / "b", seed=3)
    for name in ("tracks.csv", "path_ego.csv", "path_other.csv", "scenario.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_extract_pairs_disjoint_paths_empty():
    path_a = sp.ReferencePath.from_points([(0, 0), (10, 0)], 10.0)
    path_b = sp.ReferencePath.from_points([(0, 5), (10, 5)], 10.0)
    recs = {
        1: [tk.TrackRecord(1, k, 100 * k, float(k), 0.0, 5.0, 0.0) for k in range(5)],
        2: [tk.TrackRecord(2, k, 100 * k, float(k), 5.0, 5.0, 0.0) for k in range(5)],
    }
    assert tk.extract_pairs(recs, [path_a], [path_b]) == []


def test_extract_pairs_excludes_same_track(tmp_path):
    cfg_path, out, scn = _fixture(tmp_path)
    tracks = tk.load_tracks(out / "tracks.csv")
    only_ego = {0: tracks[0]}
    assert tk.extract_pairs(only_ego, [scn.path_ego], [scn.path_other]) == []


def test_crossing_window_filter(tmp_path):
    cfg_path, out, scn = _fixture(tmp_path)
    tracks = tk.load_tracks(out / "tracks.csv")
    assert tk.extract_pairs(tracks, [scn.path_ego], [scn.path_other], conflict_window_s=0.001) == []


def test_trace_to_records_requires_divisible_period(tmp_path):
    scn = fixture_scenario("courtesy")
    trace = sp.simulate(
        scn, sp.PolicySpec.fixed(sp.RewardWeights.courtesy()), sp.PolicySpec.follower(), max_steps=400
    )
    with pytest.raises(ValueError):
        tk.trace_to_records(trace, frame_period_ms=30)  # 80 ms steps, not divisible


def test_fixture_with_parallel_paths_raises_no_conflict(tmp_path):
    from socialplan.config import PathSpec, ScenarioConfig

    p1 = sp.ReferencePath.from_points([(0, 0), (100, 0)], 10.0)
    p2 = sp.ReferencePath.from_points([(0, 5), (100, 5)], 10.0)
    tk.write_path_csv(tmp_path / "a.csv", p1)
    tk.write_path_csv(tmp_path / "b.csv", p2)
    cfg = ScenarioConfig(
        path_ego=PathSpec(file="a.csv", speed_limit=10.0),
        path_other=PathSpec(file="b.csv", speed_limit=10.0),
        initial=sp.JointState(ego=sp.AgentState(s=0, v=5.0), other=sp.AgentState(s=0, v=5.0)),
        base_dir=tmp_path,
    )
    with pytest.raises(sp.NoConflictError):
        workflows.make_fixture(cfg, sp.RewardWeights.egoism(), seed=0, out_dir=tmp_path / "out")
