import json
import math

import numpy as np
import numpy.testing as npt
import pytest

import deps.harness as harness
from deps.config import SYSTEMS, build_config, load_config, parse_config_text
from deps.errors import BranchFailure, InvalidConfiguration
from deps.harness import (
    EXIT_BRANCH,
    EXIT_OK,
    compare_limit,
    parse_grid,
    phase_portrait,
    run,
    run_sweep,
    simulate,
)
from deps.trajectory import TrajectoryFormatError, invariant_report, read_trajectory, summary_path


def cfg_of(**kv):
    return build_config({k.replace("__", "."): str(v) for k, v in kv.items()})


class TestConfig:
    def test_parse_text(self, tmp_path):
        text = "# demo\nsim.system = sleigh-disc  # trailing\n\nsleigh.a = 0.5\ninit.dtheta = 0.2\n"
        assert parse_config_text(text) == {"sim.system": "sleigh-disc", "sleigh.a": "0.5", "init.dtheta": "0.2"}
        path = tmp_path / "c.cfg"
        path.write_text(text)
        cfg = load_config(path, ["sim.steps=7"])
        assert cfg.steps == 7 and cfg.params.a == 0.5 and cfg.init["dtheta"] == 0.2
        assert cfg.init["V1"] == 0.05

    @pytest.mark.parametrize("text, needle", [
        ("sim.system = suslov-disc\nsim.system = sleigh-disc\n", "line 2"),
        ("sim.system = suslov-disc\nnot a pair\n", "line 2"),
        ("system = suslov-disc\n", "line 1"),
    ])
    def test_parse_errors_carry_line(self, text, needle):
        with pytest.raises(InvalidConfiguration, match=needle):
            parse_config_text(text)

    @pytest.mark.parametrize("raw, field", [
        ({"sim.system": "nope"}, "sim.system"),
        ({"sim.system": "suslov-disc", "sleigh.m": "1"}, "sleigh.m"),
        ({"sim.system": "sleigh-disc", "init.q1": "0.1"}, "init.q1"),
        ({"sim.system": "sleigh-disc", "sleigh.m": "-1"}, "mass"),
        ({"sim.system": "suslov-disc", "sim.steps": "x"}, "sim.steps"),
        ({"sim.system": "suslov-disc", "sim.steps": "-1"}, "sim.steps"),
        ({"sim.system": "suslov-cont", "sim.dt": "0"}, "sim.dt"),
        ({"sim.system": "suslov-disc", "sim.policy": "random"}, "sim.policy"),
        ({"sim.system": "suslov-disc", "suslov.J11": "nan"}, "suslov.J11"),
        ({"sim.system": "sleigh-disc", "init.dtheta": "0.1", "init.p1": "0.2"}, "init"),
        ({"sim.system": "suslov-disc", "sweep.param": "sim.steps", "sweep.start": "1", "sweep.stop": "2"},
         "sweep.param"),
        ({"sim.system": "suslov-disc", "limit.align": "sideways"}, "limit.align"),
    ])
    def test_invalid_fields_are_named(self, raw, field):
        with pytest.raises(InvalidConfiguration, match=field.replace(".", r"\.")):
            build_config(raw)

    def test_defaults_and_overrides(self):
        cfg = cfg_of(sim__system="suslov-disc")
        assert (cfg.params.J11, cfg.params.J13) == (1.0, 0.3)
        assert cfg.with_overrides({"init.q1": "0.05"}).init["q1"] == 0.05
        s = cfg_of(sim__system="sleigh-disc")
        assert (s.params.m, s.params.J, s.params.a, s.params.b) == (1.0, 1.5, 1.0, 0.0)
        assert set(SYSTEMS) == {"suslov-cont", "suslov-disc", "sleigh-cont", "sleigh-disc",
                                "sleigh-free", "sleigh-naive"}

    def test_grid_parsing(self):
        assert parse_grid("q1=0:0.2:3, init.q2=0.1:0.1:1") == {"q1": (0.0, 0.2, 3), "q2": (0.1, 0.1, 1)}
        for bad in ("q1=0:1", "q1=0:1:0", ""):
            with pytest.raises(InvalidConfiguration):
                parse_grid(bad)


class TestRun:
    @pytest.mark.parametrize("system", SYSTEMS)
    def test_zero_steps_gives_initial_record(self, tmp_path, system):
        res = run(cfg_of(sim__system=system, sim__steps=0), tmp_path / "t.csv")
        traj = read_trajectory(res.paths[0])
        assert res.exit_code == EXIT_OK and len(traj.rows) == 1 and traj.rows[0][0] == 0
        assert traj.columns[0] == "k" and traj.system == system

    @pytest.mark.parametrize("system", SYSTEMS)
    def test_records_contiguous_and_self_consistent(self, tmp_path, system):
        res = run(cfg_of(sim__system=system, sim__steps=25), tmp_path / "t.csv")
        traj = read_trajectory(res.paths[0])
        assert [r[0] for r in traj.rows] == list(range(26))
        rep = invariant_report(res.paths[0])
        assert rep.consistent and max(rep.consistency.values()) <= 1e-12
        assert json.loads(summary_path(res.paths[0]).read_text())["status"] == "complete"

    def test_balanced_suslov_has_constant_momentum(self, tmp_path):
        cfg = cfg_of(sim__system="suslov-disc", suslov__J13=0, suslov__J23=0, sim__steps=40)
        traj = read_trajectory(run(cfg, tmp_path / "b.csv").paths[0])
        for c in ("M1", "M2", "M3"):
            col = traj.column(c)
            assert np.max(np.abs(col - col[0])) <= 1e-14

    def test_sleigh_a0_geometry_summary(self, tmp_path):
        cfg = cfg_of(sim__system="sleigh-disc", sleigh__a=0, sim__steps=100, init__dtheta=0.3, init__V1=0.2)
        res = run(cfg, tmp_path / "a0.csv")
        geo = res.trajectory.summary["geometry"]
        assert geo["radius"] == pytest.approx(0.2 / math.sin(0.3))
        assert geo["max_radial_deviation"] < 1e-9
        assert not geo["local_radius_strictly_monotone"]
        naive = run(cfg_of(sim__system="sleigh-naive", sleigh__a=0, sim__steps=60, init__dtheta=0.3,
                           init__V1=0.2), tmp_path / "n.csv")
        assert naive.trajectory.summary["geometry"]["local_radius_strictly_monotone"]

    def test_json_format(self, tmp_path):
        res = run(cfg_of(sim__system="sleigh-disc", sim__steps=5, sim__format="json"), tmp_path / "t.json")
        doc = json.loads(res.paths[0].read_text())
        assert set(doc) == {"meta", "columns", "records", "summary"} and len(doc["records"]) == 6
        assert len(res.paths) == 1
        assert invariant_report(res.paths[0]).consistent

    def test_determinism(self, tmp_path):
        cfg = cfg_of(sim__system="suslov-disc", sim__steps=50)
        a, b = run(cfg, tmp_path / "a.csv"), run(cfg, tmp_path / "b.csv")
        for pa, pb in zip(a.paths, b.paths):
            assert pa.read_bytes() == pb.read_bytes()
        text = a.paths[0].read_bytes()
        assert b"\r" not in text and text.endswith(b"\n")

    def test_branch_failure_writes_partial_file(self, tmp_path, monkeypatch):
        calls = {"n": 0}
        real = harness.suslov_step

        def flaky(*a, **k):
            calls["n"] += 1
            if calls["n"] == 4:
                raise BranchFailure("no root", {"target": (1.0, 2.0)})
            return real(*a, **k)

        monkeypatch.setattr(harness, "suslov_step", flaky)
        res = run(cfg_of(sim__system="suslov-disc", sim__steps=10), tmp_path / "f.csv")
        assert res.exit_code == EXIT_BRANCH
        traj = read_trajectory(res.paths[0])
        assert len(traj.rows) == 4
        summary = json.loads(summary_path(res.paths[0]).read_text())
        assert summary["status"] == "branch-failure" and summary["failure"]["step"] == 4
        assert summary["failure"]["diagnostic"]["target"] == [1.0, 2.0]

    def test_one_directional_systems_reject_backward(self):
        for system in ("sleigh-naive", "sleigh-free"):
            with pytest.raises(InvalidConfiguration):
                simulate(cfg_of(sim__system=system, sim__direction=-1))

    def test_backward_run_mirrors_forward(self, tmp_path):
        fwd = simulate(cfg_of(sim__system="sleigh-disc", sim__steps=20))[0]
        last = fwd.records()[-1]
        back = simulate(cfg_of(sim__system="sleigh-disc", sim__steps=20, sim__direction=-1,
                               init__dtheta=repr(last["dtheta"]), init__V1=repr(last["V1"]),
                               init__theta=repr(last["theta"]), init__x=repr(last["x"]),
                               init__y=repr(last["y"])))[0]
        r0, rb = fwd.records()[0], back.records()[-1]
        for c in ("dtheta", "V1", "p_theta", "p1", "theta", "x", "y"):
            assert rb[c] == pytest.approx(r0[c], abs=1e-10)

    def test_sweep(self, tmp_path):
        cfg = cfg_of(sim__system="sleigh-disc", sim__steps=5, sweep__param="sleigh.a", sweep__start=0,
                     sweep__stop=1, sweep__count=3)
        res = run_sweep(cfg, tmp_path / "s.csv")
        doc = json.loads((tmp_path / "s_sweep.json").read_text())
        assert [m["value"] for m in doc["members"]] == [0.0, 0.5, 1.0]
        assert read_trajectory(tmp_path / "s_002.csv").meta["sleigh.a"] == "1.0"
        assert res.exit_code == EXIT_OK


class TestPortrait:
    def test_single_point_matches_run(self, tmp_path):
        cfg = cfg_of(sim__system="suslov-disc", sim__steps=15)
        port = phase_portrait(cfg, parse_grid("q1=0.2:0.2:1,q2=0.1:0.1:1"), output=tmp_path / "p.csv")
        single = simulate(cfg)[0]
        assert [r[2:] for r in port.trajectory.rows] == single.rows
        assert {r[0] for r in port.trajectory.rows} == {0}

    def test_suslov_orbits_keep_quadratic_integral(self, tmp_path):
        cfg = cfg_of(sim__system="suslov-disc", sim__steps=100)
        port = phase_portrait(cfg, parse_grid("q1=-0.3:0.3:3,q2=0.05:0.25:2"), backward=True,
                              output=tmp_path / "p.csv")
        traj = read_trajectory(port.paths[0])
        orbit, quad = traj.column("orbit"), traj.column("quadratic")
        assert len(set(orbit)) == 6
        for o in set(orbit):
            q = quad[orbit == o]
            assert np.ptp(q) <= 1e-9 * max(np.max(np.abs(q)), 1e-300) + 1e-15
        ks = traj.column("k")[orbit == 0]
        assert ks[0] == -100 and ks[-1] == 100 and np.all(np.diff(ks) == 1)
        assert {"stable", "unstable", "non-equilibrium"} >= set(traj.records()[i]["tag"] for i in range(len(orbit)))

    def test_sleigh_arcs_end_near_stationary_line(self, tmp_path):
        cfg = cfg_of(sim__system="sleigh-disc", sim__steps=1500, init__p_theta=0.3, init__p1=0.0)
        port = phase_portrait(cfg, parse_grid("p_theta=-0.3:0.3:2"), backward=True, output=tmp_path / "p.csv")
        recs = port.trajectory.records()
        for o in (0, 1):
            orbit = [r for r in recs if r["orbit"] == o]
            first, last = orbit[0], orbit[-1]
            assert abs(first["p_theta"]) < 1e-6 and abs(last["p_theta"]) < 1e-6
            assert first["p1"] < 0 < last["p1"]
            assert last["tag"] == "stable" and first["tag"] == "unstable"


class TestLimit:
    def test_a0_sleigh_is_exact(self):
        cfg = cfg_of(sim__system="sleigh-disc", sleigh__a=0, limit__align="momentum")
        res = compare_limit(cfg, [1e-2, 5e-3])
        assert res.errors == [0.0, 0.0]

    @pytest.mark.parametrize("system", ["suslov-disc", "sleigh-disc"])
    def test_generic_order(self, system, tmp_path):
        res = compare_limit(cfg_of(sim__system=system), [1e-2, 5e-3, 2.5e-3], tmp_path / "l.csv")
        assert all(0.9 <= o <= 1.5 for o in res.orders), res.orders
        assert res.ok
        assert len(read_trajectory(tmp_path / "l.csv").rows) == 3

    def test_epsilons_must_halve(self):
        cfg = cfg_of(sim__system="sleigh-disc")
        for eps in ([1e-2], [1e-2, 4e-3]):
            with pytest.raises(InvalidConfiguration):
                compare_limit(cfg, eps)
        with pytest.raises(InvalidConfiguration):
            compare_limit(cfg_of(sim__system="sleigh-free"), [1e-2, 5e-3])


class TestReport:
    def test_stationary_orbit_has_zero_drift(self, tmp_path):
        cfg = cfg_of(sim__system="sleigh-disc", init__dtheta=0, init__V1=0.3, sim__steps=20)
        rep = invariant_report(run(cfg, tmp_path / "s.csv").paths[0])
        assert all(r.max_abs_drift == 0 for r in rep.reports)

    def test_suslov_drifts(self, tmp_path):
        cfg = cfg_of(sim__system="suslov-disc", sim__steps=1000, init__q1=0.05, init__q2=0.02)
        rep = {r.name: r for r in invariant_report(run(cfg, tmp_path / "s.csv").paths[0]).reports}
        assert rep["quadratic"].max_rel_drift < 1e-9
        assert rep["energy"].max_rel_drift > 1e-6
        assert all(r.max_abs_drift >= 0 for r in rep.values())

    def test_malformed_files(self, tmp_path):
        p = run(cfg_of(sim__system="sleigh-disc", sim__steps=3), tmp_path / "t.csv").paths[0]
        lines = p.read_text().split("\n")
        hdr = next(i for i, l in enumerate(lines) if l.startswith("k,"))
        bad = lines[:hdr + 2] + ["1,2,3"] + lines[hdr + 2:]
        (tmp_path / "bad.csv").write_text("\n".join(bad))
        with pytest.raises(TrajectoryFormatError, match=f"line {hdr + 3}"):
            invariant_report(tmp_path / "bad.csv")
        bad = list(lines)
        bad[hdr + 1] = bad[hdr + 1].replace(",", ",x", 1)
        (tmp_path / "bad2.csv").write_text("\n".join(bad))
        with pytest.raises(TrajectoryFormatError, match=f"line {hdr + 2}"):
            read_trajectory(tmp_path / "bad2.csv")
        (tmp_path / "bad3.json").write_text('{"meta": {}, \n "columns": [}')
        with pytest.raises(TrajectoryFormatError, match="line 2"):
            read_trajectory(tmp_path / "bad3.json")

    def test_tampered_invariant_is_inconsistent(self, tmp_path):
        p = run(cfg_of(sim__system="sleigh-disc", sim__steps=3), tmp_path / "t.csv").paths[0]
        traj = read_trajectory(p)
        i = traj.columns.index("energy")
        lines = p.read_text().split("\n")
        hdr = next(k for k, l in enumerate(lines) if l.startswith("k,"))
        cells = lines[hdr + 2].split(",")
        cells[i] = repr(float(cells[i]) * (1 + 1e-9))
        lines[hdr + 2] = ",".join(cells)
        p.write_text("\n".join(lines))
        assert not invariant_report(p).consistent

    def test_round_trip_precision(self, tmp_path):
        traj = simulate(cfg_of(sim__system="suslov-cont", sim__steps=10))[0]
        p = run(cfg_of(sim__system="suslov-cont", sim__steps=10), tmp_path / "c.csv").paths[0]
        back = read_trajectory(p)
        npt.assert_array_equal(np.array(back.rows, dtype=float), np.array(traj.rows, dtype=float))
