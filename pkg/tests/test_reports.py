"""Report rendering: delimited tables with companion figures."""

import csv
import math

import pytest

from aircombat.machines import load_specs
from aircombat.reports import atmo_report, bench_report, episode_report
from aircombat.runtime import RunMode, Session, TraceWriter, read_trace
from aircombat.scenario import AgentSlot, Environment, Mode, ScenarioConfig


@pytest.fixture(scope="module")
def catalog():
    return load_specs()


def _read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


class TestAtmoReport:
    def test_writes_table_and_figure(self, tmp_path):
        paths = atmo_report(tmp_path / "atmo", max_altitude=50_000.0,
                            samples=12, alphas=(0.2, 0.5))
        rows = _read_csv(paths["csv"])
        assert rows[0][:3] == ["altitude_m", "alpha_rad", "ground_distance_m"]
        assert len(rows) == 1 + 12 * 2
        assert paths["png"].stat().st_size > 0

    def test_ground_altitude_row_matches_plane_geometry(self, tmp_path):
        paths = atmo_report(tmp_path / "atmo", max_altitude=10_000.0,
                            samples=2, alphas=(0.5,))
        header, first, last = _read_csv(paths["csv"])
        assert float(first[0]) == 0.0
        assert float(first[2]) == 0.0
        assert float(last[2]) == pytest.approx(10_000.0 / math.cos(0.5),
                                               rel=1e-2)


class TestEpisodeReport:
    def test_writes_per_tick_rows(self, tmp_path, catalog):
        config = ScenarioConfig(
            mode=Mode.NAVIGATION,
            agents=(AgentSlot("ally_1", "navigation_bot"),),
            goal=(0.0, 2500.0, 0.0), episode_max_steps=60)
        trace = tmp_path / "episode.jsonl"
        with TraceWriter(trace) as writer:
            session = Session(Environment(config, catalog),
                              RunMode.synchronous(), writer)
            session.reset(0)
            while not session.env.done:
                session.step()
        _, records = read_trace(trace)
        paths = episode_report(tmp_path / "report", records)
        rows = _read_csv(paths["csv"])
        assert len(rows) == 1 + 60
        assert rows[0][0] == "step"
        assert rows[-1][-1] == "timeout"
        assert paths["png"].stat().st_size > 0

    def test_rejects_empty_trace(self, tmp_path):
        with pytest.raises(ValueError):
            episode_report(tmp_path, [])


class TestBenchReport:
    def test_writes_samples(self, tmp_path):
        paths = bench_report(tmp_path / "bench", [
            {"scenario": "navigation", "run": 0, "ticks": 100,
             "seconds": 0.05, "rate": 2000.0},
            {"scenario": "navigation", "run": 1, "ticks": 100,
             "seconds": 0.04, "rate": 2500.0},
        ])
        rows = _read_csv(paths["csv"])
        assert len(rows) == 3
        assert paths["png"].stat().st_size > 0

    def test_rejects_empty_samples(self, tmp_path):
        with pytest.raises(ValueError):
            bench_report(tmp_path, [])
