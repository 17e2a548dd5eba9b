"""Headless air-combat simulation: deterministic flight and weapon physics,
gym-style scenario environments, trace record/replay, and a TCP server that
hosts many environments for remote reinforcement-learning clients.

The public surface re-exported here is layered bottom-up: rigid-body physics
and atmosphere, viewer geometry, machine specs, the combat world, scenario
environments, the run/record/replay loop, and the wire protocol with its
server and clients.
"""

__version__ = "0.1.0"

from .physics import (
    AeroParams,
    BodyState,
    ControlInput,
    ForceSet,
    KineticsMatrixError,
    STANDARD_ATMOSPHERE,
    air_density,
    build_kinetics_matrix,
    step_dynamics,
)
from .geometry import (
    NoIntersectionError,
    SkyPalette,
    atmosphere_angle,
    ground_distance,
    horizon_angle,
    space_color,
)
from .machines import (
    AircraftSpec,
    MissileSpec,
    SpecCatalog,
    SpecError,
    load_specs,
)
from .world import World, WorldError, TickCommand
from .scenario import (
    ActionVec,
    AgentSlot,
    Environment,
    Mode,
    Observation,
    RewardSpec,
    ScenarioConfig,
    ScenarioError,
    SpawnRegion,
    StepResult,
    load_scenario,
    scenario_catalog,
)
from .runtime import (
    ReplayReport,
    RunMode,
    Session,
    TraceWriter,
    measure_throughput,
    read_trace,
    replay,
    run_episode,
)
from .protocol import PROTOCOL_SCHEMA, ProtocolError, canonical_dumps
from .server import EnvHost, Server
from .client import ClientError, InProcessClient, RemoteEnvClient

__all__ = [
    "__version__",
    # physics
    "AeroParams", "BodyState", "ControlInput", "ForceSet",
    "KineticsMatrixError", "STANDARD_ATMOSPHERE", "air_density",
    "build_kinetics_matrix", "step_dynamics",
    # geometry
    "NoIntersectionError", "SkyPalette", "atmosphere_angle",
    "ground_distance", "horizon_angle", "space_color",
    # machines
    "AircraftSpec", "MissileSpec", "SpecCatalog", "SpecError", "load_specs",
    # world
    "World", "WorldError", "TickCommand",
    # scenario
    "ActionVec", "AgentSlot", "Environment", "Mode", "Observation",
    "RewardSpec", "ScenarioConfig", "ScenarioError", "SpawnRegion",
    "StepResult", "load_scenario", "scenario_catalog",
    # runtime
    "ReplayReport", "RunMode", "Session", "TraceWriter",
    "measure_throughput", "read_trace", "replay", "run_episode",
    # protocol, server, clients
    "PROTOCOL_SCHEMA", "ProtocolError", "canonical_dumps",
    "EnvHost", "Server",
    "ClientError", "InProcessClient", "RemoteEnvClient",
]
