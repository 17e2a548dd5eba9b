"""Report rendering for the CLI: delimited tables plus matplotlib figures
written side by side, so every report directory is both machine-readable
and eyeball-readable."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .geometry import (  # noqa: E402
    ATMOSPHERE_THICKNESS,
    EARTH_RADIUS,
    SkyPalette,
    atmosphere_angle,
    ground_distance,
    horizon_angle,
    space_color,
)
from .runtime import TraceRecord  # noqa: E402


def _ensure_dir(outdir: str | Path) -> Path:
    path = Path(outdir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


# -- sky geometry table -------------------------------------------------------


def atmo_report(outdir: str | Path, max_altitude: float = 150_000.0,
                samples: int = 60, alphas: tuple[float, ...] = (0.1, 0.3, 0.6),
                radius: float = EARTH_RADIUS,
                thickness: float = ATMOSPHERE_THICKNESS,
                palette: SkyPalette = SkyPalette()) -> dict[str, Path]:
    """Tabulate ground distances, horizon/atmosphere angles, and sky color
    over an altitude sweep; write atmo.csv and atmo.png."""
    outdir = _ensure_dir(outdir)
    altitudes = [max_altitude * i / (samples - 1) for i in range(samples)]

    rows = []
    for altitude in altitudes:
        color = space_color(altitude, palette, thickness)
        for alpha in alphas:
            try:
                distance = ground_distance(altitude, alpha, radius)
            except ValueError:
                distance = math.nan    # ray misses the ground
            rows.append([altitude, alpha, distance,
                         horizon_angle(altitude, radius),
                         atmosphere_angle(altitude, radius, thickness),
                         color[0], color[1], color[2]])
    csv_path = outdir / "atmo.csv"
    _write_csv(csv_path,
               ["altitude_m", "alpha_rad", "ground_distance_m",
                "horizon_angle_rad", "atmosphere_angle_rad",
                "color_r", "color_g", "color_b"],
               rows)

    figure, axes = plt.subplots(2, 2, figsize=(11, 8))
    for alpha in alphas:
        distances = [row[2] for row in rows if row[1] == alpha]
        axes[0][0].plot(altitudes, distances, label=f"alpha={alpha}")
    axes[0][0].set_xlabel("altitude [m]")
    axes[0][0].set_ylabel("ground distance [m]")
    axes[0][0].set_title("view-ray ground distance")
    axes[0][0].legend()

    axes[0][1].plot(altitudes, [horizon_angle(h, radius) for h in altitudes])
    axes[0][1].set_xlabel("altitude [m]")
    axes[0][1].set_ylabel("horizon angle [rad]")
    axes[0][1].set_title("horizon angle")

    axes[1][0].plot(altitudes,
                    [atmosphere_angle(h, radius, thickness)
                     for h in altitudes])
    axes[1][0].set_xlabel("altitude [m]")
    axes[1][0].set_ylabel("atmosphere angle [rad]")
    axes[1][0].set_title("atmosphere band angle")

    strip = [[space_color(h, palette, thickness) for h in altitudes]]
    axes[1][1].imshow(strip, aspect="auto",
                      extent=(0.0, max_altitude, 0.0, 1.0))
    axes[1][1].set_yticks([])
    axes[1][1].set_xlabel("altitude [m]")
    axes[1][1].set_title("sky color blend")

    figure.tight_layout()
    png_path = outdir / "atmo.png"
    figure.savefig(png_path, dpi=110)
    plt.close(figure)
    return {"csv": csv_path, "png": png_path}


# -- episode trace report -----------------------------------------------------


def episode_report(outdir: str | Path,
                   records: list[TraceRecord]) -> dict[str, Path]:
    """Per-tick curves from a recorded trace: objective distance, speeds,
    and reward; write episode.csv and episode.png."""
    if not records:
        raise ValueError("cannot report on an empty trace")
    outdir = _ensure_dir(outdir)
    slots = sorted(records[0].agents)

    rows = []
    series: dict[str, dict[str, list[float]]] = {
        slot: {"distance": [], "v_h": [], "v_v": [], "reward": [],
               "cumulative": [], "step": []} for slot in slots}
    for record in records:
        for slot in slots:
            agent = record.agents.get(slot)
            if agent is None:
                continue
            obs = agent["observation"]
            distance = math.sqrt(obs[0] ** 2 + obs[1] ** 2 + obs[2] ** 2)
            track = series[slot]
            track["step"].append(record.step)
            track["distance"].append(distance)
            track["v_h"].append(obs[6])
            track["v_v"].append(obs[7])
            track["reward"].append(agent["reward"])
            previous = track["cumulative"][-1] if track["cumulative"] else 0.0
            track["cumulative"].append(previous + agent["reward"])
            rows.append([record.step, slot, distance, obs[6], obs[7],
                         agent["reward"], track["cumulative"][-1],
                         agent["done"], agent["status"] or ""])
    csv_path = outdir / "episode.csv"
    _write_csv(csv_path,
               ["step", "slot", "objective_distance_m", "v_horizontal_ms",
                "v_vertical_ms", "reward", "cumulative_reward", "done",
                "status"],
               rows)

    figure, axes = plt.subplots(3, 1, figsize=(10, 9), sharex=True)
    for slot in slots:
        track = series[slot]
        axes[0].plot(track["step"], track["distance"], label=slot)
        axes[1].plot(track["step"], track["v_h"], label=f"{slot} horizontal")
        axes[1].plot(track["step"], track["v_v"], linestyle="--",
                     label=f"{slot} vertical")
        axes[2].plot(track["step"], track["cumulative"], label=slot)
    axes[0].set_ylabel("objective distance [m]")
    axes[0].legend()
    axes[1].set_ylabel("speed [m/s]")
    axes[1].legend()
    axes[2].set_ylabel("cumulative reward")
    axes[2].set_xlabel("tick")
    figure.tight_layout()
    png_path = outdir / "episode.png"
    figure.savefig(png_path, dpi=110)
    plt.close(figure)
    return {"csv": csv_path, "png": png_path}


# -- throughput report --------------------------------------------------------


def bench_report(outdir: str | Path,
                 samples: list[dict]) -> dict[str, Path]:
    """Throughput samples (scenario, ticks, seconds, rate) as CSV + chart."""
    if not samples:
        raise ValueError("no benchmark samples to report")
    outdir = _ensure_dir(outdir)
    csv_path = outdir / "bench.csv"
    _write_csv(csv_path, ["scenario", "run", "ticks", "seconds",
                          "ticks_per_second"],
               [[s["scenario"], s["run"], s["ticks"], s["seconds"],
                 s["rate"]] for s in samples])

    figure, axis = plt.subplots(figsize=(8, 5))
    labels = [f"{s['scenario']} #{s['run']}" for s in samples]
    axis.bar(range(len(samples)), [s["rate"] for s in samples])
    axis.set_xticks(range(len(samples)), labels, rotation=30, ha="right")
    axis.set_ylabel("ticks per second")
    axis.set_title("stepping throughput")
    figure.tight_layout()
    png_path = outdir / "bench.png"
    figure.savefig(png_path, dpi=110)
    plt.close(figure)
    return {"csv": csv_path, "png": png_path}
