"""Operator CLI: serve an environment fleet, run and replay local episodes,
emit sky-geometry tables, validate data files, and benchmark stepping."""

from __future__ import annotations

import statistics
from pathlib import Path

import click

from .autopilot import AutopilotState, navigation_policy_step
from .machines import load_specs
from .runtime import (
    RunMode,
    TraceWriter,
    measure_throughput,
    read_trace,
    run_episode,
)
from .runtime import replay as replay_trace
from .scenario import ActionVec, Environment, load_scenario, scenario_catalog
from .server import (
    DEFAULT_BARRIER_TIMEOUT,
    DEFAULT_MAX_ENVS,
    Server,
    default_bind,
)

POLICIES = ("neutral", "autopilot_navigate")


def _resolve_scenario(name_or_path: str):
    path = Path(name_or_path)
    if path.exists():
        return load_scenario(path)
    packaged = scenario_catalog()
    if name_or_path in packaged:
        return packaged[name_or_path]
    raise click.ClickException(
        f"no scenario file or packaged scenario named {name_or_path!r}; "
        "packaged: " + ", ".join(sorted(packaged)))


def _make_policy(name: str, env: Environment):
    if name == "neutral":
        return lambda observations: {slot: ActionVec()
                                     for slot in env.external_slots}
    if env.config.goal is None:
        raise click.ClickException(
            "autopilot_navigate needs a navigation scenario with a goal")
    states: dict[str, AutopilotState] = {}

    def policy(observations):
        actions = {}
        for slot in env.external_slots:
            craft = env.world.aircraft(slot)
            if not craft.alive:
                continue
            state = states.get(slot)
            if state is None:
                state = AutopilotState(
                    target_heading=craft.body.orientation[2],
                    target_altitude=env.config.goal[1])
                states[slot] = state
            controls = navigation_policy_step(craft, env.config.goal, state,
                                              env.config.dt)
            actions[slot] = ActionVec(rudder=controls.yaw_level,
                                      elevator=controls.pitch_level,
                                      aileron=controls.roll_level)
        return actions

    return policy


@click.group()
def main() -> None:
    """Headless air-combat simulation engine and environment server."""


@main.command()
@click.option("--bind", default=None, metavar="HOST:PORT",
              help="Bind address; defaults to $AIRCOMBAT_BIND.")
@click.option("--max-envs", default=DEFAULT_MAX_ENVS, show_default=True,
              help="Concurrent environment limit.")
@click.option("--seed-base", default=0, show_default=True,
              help="Env seeds are seed_base + creation index.")
@click.option("--barrier-timeout", default=DEFAULT_BARRIER_TIMEOUT,
              show_default=True,
              help="Seconds an incomplete multi-agent tick may wait.")
def serve(bind, max_envs, seed_base, barrier_timeout) -> None:
    """Host environments over TCP."""
    server = Server(bind=bind if bind is not None else default_bind(),
                    catalog=load_specs(), max_envs=max_envs,
                    seed_base=seed_base, barrier_timeout=barrier_timeout)
    click.echo(f"listening on {server.bound_address} "
               f"(max {max_envs} envs, seed base {seed_base})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


@main.command()
@click.option("--scenario", required=True,
              help="Scenario JSON file or packaged scenario name.")
@click.option("--mode", type=click.Choice(["sync", "async"]), default="sync",
              show_default=True)
@click.option("--ratio", default=1, show_default=True,
              help="Physics ticks per inference (async mode).")
@click.option("--policy", type=click.Choice(POLICIES), default="neutral",
              show_default=True, help="Controller for external slots.")
@click.option("--seed", default=None, type=int,
              help="Override the scenario seed.")
@click.option("--trace", type=click.Path(dir_okay=False), default=None,
              help="Write a JSON Lines trace of every tick.")
@click.option("--report", "report_dir", type=click.Path(file_okay=False),
              default=None, help="Write episode.csv/episode.png here.")
def run(scenario, mode, ratio, policy, seed, trace, report_dir) -> None:
    """Run one local episode headlessly."""
    config = _resolve_scenario(scenario)
    if mode == "sync":
        if ratio != 1:
            raise click.ClickException("sync mode runs at ratio 1")
        run_mode = RunMode.synchronous()
    else:
        run_mode = RunMode.asynchronous(ratio)
    if trace is None and report_dir is not None:
        Path(report_dir).mkdir(parents=True, exist_ok=True)
        trace = str(Path(report_dir) / "episode.jsonl")

    env = Environment(config)
    chosen_policy = _make_policy(policy, env)
    if trace is not None:
        with TraceWriter(trace) as writer:
            summary = run_episode(env, run_mode, seed=seed, writer=writer,
                                  policy=chosen_policy)
    else:
        summary = run_episode(env, run_mode, seed=seed,
                              policy=chosen_policy)

    click.echo(f"outcome: {summary['outcome']}  "
               f"(seed {summary['seed']}, {summary['ticks']} ticks)")
    for slot, status in summary["statuses"].items():
        click.echo(f"  {slot}: {status}, return "
                   f"{summary['returns'][slot]:.4f}")
    if trace is not None:
        click.echo(f"trace written to {trace}")
    if report_dir is not None:
        from .reports import episode_report
        _, records = read_trace(trace)
        paths = episode_report(report_dir, records)
        click.echo(f"report written to {paths['csv']} and {paths['png']}")


@main.command()
@click.option("--trace", required=True, type=click.Path(exists=True,
                                                        dir_okay=False))
def replay(trace) -> None:
    """Re-run a trace and verify it bit-exactly."""
    report = replay_trace(trace)
    click.echo(report.describe())
    if not report.ok:
        raise SystemExit(1)


@main.command("atmo-table")
@click.option("--out", "outdir", default="reports/atmo", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--max-altitude", default=150_000.0, show_default=True)
@click.option("--samples", default=60, show_default=True)
@click.option("--alpha", "alphas", multiple=True, type=float,
              help="View-ray angles from nadir, radians "
                   "(default 0.1 0.3 0.6).")
def atmo_table(outdir, max_altitude, samples, alphas) -> None:
    """Emit the sky-geometry table as CSV with companion figures."""
    from .reports import atmo_report
    if samples < 2:
        raise click.ClickException("need at least 2 altitude samples")
    paths = atmo_report(outdir, max_altitude=max_altitude, samples=samples,
                        alphas=tuple(alphas) or (0.1, 0.3, 0.6))
    click.echo(f"wrote {paths['csv']} and {paths['png']}")


@main.group()
def specs() -> None:
    """Inspect and validate data files."""


@specs.command()
@click.option("--root", default=None, type=click.Path(file_okay=False,
                                                      exists=True),
              help="Machine spec directory (default: packaged data).")
def validate(root) -> None:
    """Load every aircraft, missile, and scenario spec; fail on any error."""
    try:
        catalog = load_specs(root)
        scenarios = scenario_catalog()
        for name, config in scenarios.items():
            Environment(config, catalog)
    except (ValueError, OSError, KeyError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"OK: {len(catalog.aircraft)} aircraft, "
               f"{len(catalog.missiles)} missiles, "
               f"{len(scenarios)} scenarios")


@main.command()
@click.option("--scenario", default="dogfight_bots", show_default=True,
              help="Scenario JSON file or packaged scenario name.")
@click.option("--ticks", default=5000, show_default=True)
@click.option("--repeat", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--report", "report_dir", type=click.Path(file_okay=False),
              default=None, help="Write bench.csv/bench.png here.")
def bench(scenario, ticks, repeat, seed, report_dir) -> None:
    """Measure stepping throughput in physics ticks per second."""
    config = _resolve_scenario(scenario)
    samples = []
    for run_index in range(repeat):
        env = Environment(config)
        rate = measure_throughput(env, ticks=ticks, seed=seed)
        samples.append({"scenario": scenario, "run": run_index,
                        "ticks": ticks, "seconds": ticks / rate,
                        "rate": rate})
        click.echo(f"run {run_index}: {rate:,.0f} ticks/s")
    mean_rate = statistics.fmean(sample["rate"] for sample in samples)
    click.echo(f"mean: {mean_rate:,.0f} ticks/s over {repeat} run(s)")
    if report_dir is not None:
        from .reports import bench_report
        paths = bench_report(report_dir, samples)
        click.echo(f"report written to {paths['csv']} and {paths['png']}")


if __name__ == "__main__":
    main()
