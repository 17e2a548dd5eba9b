"""Flight physics core: atmosphere, per-axis dynamic pressure, force and
moment assembly, and a fixed-step semi-implicit Euler integrator.

The model is deliberately simplified. Forces are expressed in sim units and
applied as accelerations on a unit mass (``BodyState.mass`` defaults to 1.0),
so a thrust force of 15 accelerates a default airframe at 15 m/s^2.

Frames and conventions:

* World frame: X east, Y up, Z north. Altitude is ``position[1]``.
* Body frame: X lateral (right), Y up, Z forward.
* Euler angles ``(phi, theta, psi)`` = (roll, pitch, yaw). Positive phi drops
  the right wing, positive theta raises the nose, positive psi turns the nose
  from +Z toward +X. phi and psi wrap to (-pi, pi]; theta clamps to
  [-pi/2, pi/2].
* Angular velocity components are (pitch-up rate, yaw-right rate, roll-right
  rate) about the body lateral / vertical / longitudinal axes, matching the
  moment vector returned by :func:`compute_moments`.

Everything here is pure: functions take state and return new state, and the
same inputs always produce bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Vec3 = tuple[float, float, float]

# Physical constants.
GAS_CONSTANT = 8.3144621        # J/(mol*K)
MOLAR_MASS_AIR = 0.0289652      # kg/mol
GRAVITY = 9.80665               # m/s^2
SEA_LEVEL_PRESSURE = 101325.0   # Pa
STANDARD_TEMPERATURE = 288.15   # K

KMH_TO_MS = 1.0 / 3.6

# Fraction of the ceiling speed at which the overspeed drag term cuts in.
SPEED_CEILING_ONSET = 0.8

# Keeps sec(theta) finite in the Euler-rate matrix when theta sits on the
# +-pi/2 clamp.
_PITCH_GUARD = 1e-6

ZERO3: Vec3 = (0.0, 0.0, 0.0)


def clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.fmod(angle + math.pi, 2.0 * math.pi)
    if r <= 0.0:
        r += 2.0 * math.pi
    return r - math.pi


@dataclass(frozen=True, slots=True)
class AtmosphereModel:
    """Isothermal barometric atmosphere.

    Pressure decays exponentially with altitude at a constant temperature;
    density follows from the ideal gas law.
    """

    sea_level_pressure: float = SEA_LEVEL_PRESSURE  # Pa
    temperature: float = STANDARD_TEMPERATURE       # K, constant per run

    def __post_init__(self) -> None:
        if not self.temperature > 0.0:
            raise ValueError(f"temperature must be > 0 K, got {self.temperature}")
        if not self.sea_level_pressure > 0.0:
            raise ValueError(
                f"sea-level pressure must be > 0 Pa, got {self.sea_level_pressure}"
            )


STANDARD_ATMOSPHERE = AtmosphereModel()


def air_density(altitude: float, atmosphere: AtmosphereModel = STANDARD_ATMOSPHERE) -> float:
    """Air density in kg/m^3 at ``altitude`` metres.

    rho(h) = p(h) * M / (R * T) with p(h) = p0 * exp(-M * G * h / (R * T)).
    Strictly positive and strictly decreasing in altitude.
    """
    rt = GAS_CONSTANT * atmosphere.temperature
    pressure = atmosphere.sea_level_pressure * math.exp(
        -MOLAR_MASS_AIR * GRAVITY * altitude / rt
    )
    return pressure * MOLAR_MASS_AIR / rt


@dataclass(frozen=True, slots=True)
class BodyState:
    """Kinematic state of one rigid body.

    position and linear_velocity are world frame; angular_velocity is body
    frame in the (pitch, yaw, roll) rate convention described in the module
    docstring. Construction normalizes angles so invalid orientations cannot
    be represented.
    """

    position: Vec3 = ZERO3
    orientation: Vec3 = ZERO3        # (phi, theta, psi) rad
    linear_velocity: Vec3 = ZERO3    # m/s
    angular_velocity: Vec3 = ZERO3   # rad/s
    mass: float = 1.0                # sim units

    def __post_init__(self) -> None:
        if not self.mass > 0.0:
            raise ValueError(f"mass must be > 0, got {self.mass}")
        phi, theta, psi = self.orientation
        normalized = (
            wrap_angle(phi),
            clamp(theta, -math.pi / 2.0, math.pi / 2.0),
            wrap_angle(psi),
        )
        object.__setattr__(self, "orientation", normalized)

    @property
    def altitude(self) -> float:
        return self.position[1]

    @property
    def speed(self) -> float:
        vx, vy, vz = self.linear_velocity
        return math.sqrt(vx * vx + vy * vy + vz * vz)


def _rotation(orientation: Vec3) -> tuple[float, ...]:
    """Body-to-world rotation matrix entries, row major."""
    phi, theta, psi = orientation
    sf, cf = math.sin(phi), math.cos(phi)
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(psi), math.cos(psi)
    return (
        cp * cf + sp * st * sf, cp * sf - sp * st * cf, sp * ct,
        -ct * sf,               ct * cf,                st,
        -sp * cf + cp * st * sf, -sp * sf - cp * st * cf, cp * ct,
    )


def body_to_world(orientation: Vec3, vector: Vec3) -> Vec3:
    r = _rotation(orientation)
    x, y, z = vector
    return (
        r[0] * x + r[1] * y + r[2] * z,
        r[3] * x + r[4] * y + r[5] * z,
        r[6] * x + r[7] * y + r[8] * z,
    )


def world_to_body(orientation: Vec3, vector: Vec3) -> Vec3:
    r = _rotation(orientation)
    x, y, z = vector
    # Transpose of the body-to-world matrix.
    return (
        r[0] * x + r[3] * y + r[6] * z,
        r[1] * x + r[4] * y + r[7] * z,
        r[2] * x + r[5] * y + r[8] * z,
    )


def forward_axis(orientation: Vec3) -> Vec3:
    """World-frame unit vector along the body Z (nose) axis."""
    phi, theta, psi = orientation
    ct = math.cos(theta)
    return (math.sin(psi) * ct, math.sin(theta), math.cos(psi) * ct)


@dataclass(frozen=True, slots=True)
class AeroParams:
    """Aerodynamic and propulsion coefficients for one airframe.

    Force-like values are sim units (accelerations for a unit mass);
    the speed ceiling is km/h; altitudes are metres.
    """

    thrust_force: float
    post_combustion_force: float
    angular_frictions: float
    speed_ceiling: float            # km/h
    max_safe_altitude: float        # m, full thrust at or below
    max_altitude: float             # m, zero thrust at or above
    wings_lift: float
    flaps_lift: float
    flaps_drag: float
    drag_coeff: float
    wings_geometry_friction: float
    pitch_friction: float
    yaw_friction: float
    roll_friction: float
    reference_speed: float = 150.0  # m/s, sea-level speed at which q_z saturates

    def __post_init__(self) -> None:
        for name in (
            "thrust_force", "post_combustion_force", "angular_frictions",
            "speed_ceiling", "wings_lift", "flaps_lift", "flaps_drag",
            "drag_coeff", "wings_geometry_friction", "pitch_friction",
            "yaw_friction", "roll_friction",
        ):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.reference_speed > 0.0:
            raise ValueError(f"reference_speed must be > 0, got {self.reference_speed}")
        if not self.max_safe_altitude < self.max_altitude:
            raise ValueError(
                "max_safe_altitude must be below max_altitude, got "
                f"{self.max_safe_altitude} >= {self.max_altitude}"
            )

    def reference_pressure(self, atmosphere: AtmosphereModel = STANDARD_ATMOSPHERE) -> float:
        """Dynamic pressure at reference_speed and sea level, in Pa."""
        v = self.reference_speed
        return air_density(0.0, atmosphere) * v * v / 2.0


@dataclass(frozen=True, slots=True)
class ControlInput:
    """Pilot inputs for one tick. Levels are clamped at construction:
    surfaces to [-1, 1], thrust and flaps to [0, 1].

    Positive pitch_level raises the nose, positive yaw_level turns it right,
    positive roll_level drops the right wing.
    """

    pitch_level: float = 0.0
    yaw_level: float = 0.0
    roll_level: float = 0.0
    thrust_level: float = 0.0
    flaps_level: float = 0.0
    post_combustion: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "pitch_level", clamp(self.pitch_level, -1.0, 1.0))
        object.__setattr__(self, "yaw_level", clamp(self.yaw_level, -1.0, 1.0))
        object.__setattr__(self, "roll_level", clamp(self.roll_level, -1.0, 1.0))
        object.__setattr__(self, "thrust_level", clamp(self.thrust_level, 0.0, 1.0))
        object.__setattr__(self, "flaps_level", clamp(self.flaps_level, 0.0, 1.0))


@dataclass(frozen=True, slots=True)
class ForceSet:
    """World-frame force components and their signed sum.

    total_move is always assembled as thrust + lift - drag + gravity,
    component by component; :meth:`from_components` is the only constructor
    that computes it, so the identity holds bit-exactly by construction.
    """

    lift: Vec3
    drag: Vec3
    thrust: Vec3
    gravity: Vec3
    total_move: Vec3

    @classmethod
    def from_components(cls, lift: Vec3, drag: Vec3, thrust: Vec3, gravity: Vec3) -> "ForceSet":
        total = (
            thrust[0] + lift[0] - drag[0] + gravity[0],
            thrust[1] + lift[1] - drag[1] + gravity[1],
            thrust[2] + lift[2] - drag[2] + gravity[2],
        )
        return cls(lift=lift, drag=drag, thrust=thrust, gravity=gravity, total_move=total)


def dynamic_pressure(density: float, velocity_body: Vec3) -> Vec3:
    """Signed per-axis dynamic pressure q_i = rho * v_i * |v_i| / 2, in Pa."""
    vx, vy, vz = velocity_body
    return (
        density * vx * abs(vx) / 2.0,
        density * vy * abs(vy) / 2.0,
        density * vz * abs(vz) / 2.0,
    )


def stall_factor(state: BodyState, density: float, params: AeroParams,
                 atmosphere: AtmosphereModel = STANDARD_ATMOSPHERE) -> float:
    """Normalized frontal dynamic pressure q_z in [0, 1].

    The frontal (body Z) dynamic pressure is divided by the airframe's
    reference pressure and clamped. 0 means no airflow over the wings: no
    lift, no drag, and dead control surfaces.
    """
    v_body = world_to_body(state.orientation, state.linear_velocity)
    q_forward = density * v_body[2] * abs(v_body[2]) / 2.0
    return clamp(q_forward / params.reference_pressure(atmosphere), 0.0, 1.0)


def altitude_thrust_factor(altitude: float, params: AeroParams) -> float:
    """Engine output scale: 1 at or below max_safe_altitude, linearly down
    to 0 at max_altitude, 0 above."""
    if altitude <= params.max_safe_altitude:
        return 1.0
    if altitude >= params.max_altitude:
        return 0.0
    span = params.max_altitude - params.max_safe_altitude
    return (params.max_altitude - altitude) / span


def compute_forces(state: BodyState, controls: ControlInput, params: AeroParams,
                   atmosphere: AtmosphereModel = STANDARD_ATMOSPHERE) -> ForceSet:
    """Assemble the world-frame force set for one airframe.

    Lift acts along the body up axis and drag along the velocity vector, both
    scaled by the stall factor; thrust acts along the nose and decays to zero
    between max_safe_altitude and max_altitude; gravity is (0, -m*G, 0).
    An extra quadratic drag term ramps in above SPEED_CEILING_ONSET of the
    ceiling speed so no engine can push the airframe far beyond its ceiling.
    """
    altitude = state.position[1]
    density = air_density(altitude, atmosphere)
    q_z = stall_factor(state, density, params, atmosphere)
    rot = _rotation(state.orientation)

    lift_mag = q_z * (params.wings_lift + controls.flaps_level * params.flaps_lift)
    lift = (rot[1] * lift_mag, rot[4] * lift_mag, rot[7] * lift_mag)

    vx, vy, vz = state.linear_velocity
    speed = math.sqrt(vx * vx + vy * vy + vz * vz)
    if speed > 0.0:
        drag_mag = q_z * (
            params.drag_coeff
            + controls.flaps_level * params.flaps_drag
            + params.wings_geometry_friction
        )
        ceiling = params.speed_ceiling * KMH_TO_MS
        onset = SPEED_CEILING_ONSET * ceiling
        if speed > onset and ceiling > onset:
            over = (speed - onset) / (ceiling - onset)
            drag_mag += (params.thrust_force + params.post_combustion_force) * over * over
        drag = (vx / speed * drag_mag, vy / speed * drag_mag, vz / speed * drag_mag)
    else:
        drag = ZERO3

    engine = controls.thrust_level * params.thrust_force
    if controls.post_combustion:
        engine += params.post_combustion_force
    engine *= altitude_thrust_factor(altitude, params)
    thrust = (rot[2] * engine, rot[5] * engine, rot[8] * engine)

    gravity = (0.0, -state.mass * GRAVITY, 0.0)
    return ForceSet.from_components(lift=lift, drag=drag, thrust=thrust, gravity=gravity)


def compute_moments(state: BodyState, controls: ControlInput, params: AeroParams,
                    q_z: float) -> Vec3:
    """Body-frame control moment vector (pitch, yaw, roll components).

    Each component is q_z * level * friction along its body axis, so all
    moments vanish exactly when q_z is 0.
    """
    return (
        q_z * controls.pitch_level * params.pitch_friction,
        q_z * controls.yaw_level * params.yaw_friction,
        q_z * controls.roll_level * params.roll_friction,
    )


def angular_damping_factor(state: BodyState, density: float, params: AeroParams,
                           dt: float) -> float:
    """Per-step angular velocity decay factor in (0, 1].

    Damping rate is angular_frictions times the (non-negative) frontal
    dynamic pressure, applied as exponential decay for unconditional
    stability at any dt.
    """
    v_body = world_to_body(state.orientation, state.linear_velocity)
    q_forward = density * v_body[2] * abs(v_body[2]) / 2.0
    if q_forward <= 0.0:
        return 1.0
    return math.exp(-params.angular_frictions * q_forward * dt)


def integrate(state: BodyState, forces: ForceSet, moment: Vec3, dt: float,
              angular_damping: float = 1.0) -> BodyState:
    """Advance one body by dt with semi-implicit Euler.

    Velocity updates first and the new velocity moves the position; angular
    velocity updates (and damps) first and the new rates drive the Euler
    angles through the kinematic matrix. Pure function: does not touch
    ``state``.
    """
    ax = forces.total_move[0] / state.mass
    ay = forces.total_move[1] / state.mass
    az = forces.total_move[2] / state.mass
    vx = state.linear_velocity[0] + ax * dt
    vy = state.linear_velocity[1] + ay * dt
    vz = state.linear_velocity[2] + az * dt
    position = (
        state.position[0] + vx * dt,
        state.position[1] + vy * dt,
        state.position[2] + vz * dt,
    )

    wx = (state.angular_velocity[0] + moment[0] * dt) * angular_damping
    wy = (state.angular_velocity[1] + moment[1] * dt) * angular_damping
    wz = (state.angular_velocity[2] + moment[2] * dt) * angular_damping

    phi, theta, psi = state.orientation
    sf, cf = math.sin(phi), math.cos(phi)
    # Guard the clamp boundary so tan/sec stay finite.
    theta_g = clamp(theta, -math.pi / 2.0 + _PITCH_GUARD, math.pi / 2.0 - _PITCH_GUARD)
    tt = math.tan(theta_g)
    sec_t = 1.0 / math.cos(theta_g)
    swing = sf * wx + cf * wy
    phi_dot = wz + tt * swing
    theta_dot = cf * wx - sf * wy
    psi_dot = sec_t * swing

    return BodyState(
        position=position,
        orientation=(phi + phi_dot * dt, theta + theta_dot * dt, psi + psi_dot * dt),
        linear_velocity=(vx, vy, vz),
        angular_velocity=(wx, wy, wz),
        mass=state.mass,
    )


def step_dynamics(state: BodyState, controls: ControlInput, params: AeroParams,
                  dt: float, atmosphere: AtmosphereModel = STANDARD_ATMOSPHERE,
                  ) -> tuple[BodyState, ForceSet, float]:
    """One full dynamics tick: density, stall factor, forces, moments,
    damping, integration. Returns (new state, force set, q_z)."""
    density = air_density(state.position[1], atmosphere)
    q_z = stall_factor(state, density, params, atmosphere)
    forces = compute_forces(state, controls, params, atmosphere)
    moment = compute_moments(state, controls, params, q_z)
    damping = angular_damping_factor(state, density, params, dt)
    return integrate(state, forces, moment, dt, angular_damping=damping), forces, q_z


class KineticsMatrixError(ValueError):
    """Raised for external kinetics matrices that are malformed, internally
    inconsistent, or describe an unrepresentable attitude."""


# |tan(theta)| at which the externally supplied attitude is considered to sit
# on the sec(theta) singularity.
_TAN_PITCH_LIMIT = 1e12


def build_kinetics_matrix(position: Vec3, theta: float, phi: float) -> list[list[float]]:
    """Build the 4x3 external-kinetics matrix for a pose.

    Rows 0-2 are the Euler-rate rows [1, tan(theta)sin(phi), cos(phi)tan(theta)],
    [0, cos(phi), -sin(phi)], [0, sec(theta)sin(phi), sec(theta)cos(phi)]; row 3
    is the world position. theta = +-pi/2 is rejected: sec(theta) is undefined
    there.
    """
    if abs(math.tan(theta)) >= _TAN_PITCH_LIMIT or not math.isfinite(theta):
        raise KineticsMatrixError(f"pitch {theta} sits on the sec(theta) singularity")
    sf, cf = math.sin(phi), math.cos(phi)
    tt = math.tan(theta)
    sec_t = 1.0 / math.cos(theta)
    return [
        [1.0, tt * sf, cf * tt],
        [0.0, cf, -sf],
        [0.0, sec_t * sf, sec_t * cf],
        [float(position[0]), float(position[1]), float(position[2])],
    ]


def parse_kinetics_matrix(matrix: list[list[float]]) -> tuple[Vec3, float, float]:
    """Validate an external-kinetics matrix and extract (position, theta, phi).

    The matrix must be 4x3, finite, carry the fixed first column (1, 0, 0),
    and have rows consistent with a single (theta, phi) pair; anything else
    raises KineticsMatrixError.
    """
    if len(matrix) != 4 or any(len(row) != 3 for row in matrix):
        raise KineticsMatrixError("kinetics matrix must be 4x3")
    flat = [float(v) for row in matrix for v in row]
    if not all(math.isfinite(v) for v in flat):
        raise KineticsMatrixError("kinetics matrix entries must be finite")
    if matrix[0][0] != 1.0 or matrix[1][0] != 0.0 or matrix[2][0] != 0.0:
        raise KineticsMatrixError("kinetics matrix first column must be (1, 0, 0)")

    phi = math.atan2(-float(matrix[1][2]), float(matrix[1][1]))
    sf, cf = math.sin(phi), math.cos(phi)
    # Projecting row 0 onto (sin(phi), cos(phi)) recovers tan(theta) exactly.
    tan_theta = float(matrix[0][1]) * sf + float(matrix[0][2]) * cf
    if abs(tan_theta) >= _TAN_PITCH_LIMIT:
        raise KineticsMatrixError("pitch sits on the sec(theta) singularity")
    theta = math.atan(tan_theta)

    expected = build_kinetics_matrix((0.0, 0.0, 0.0), theta, phi)
    for i in range(3):
        for j in range(3):
            ref = expected[i][j]
            tol = 1e-6 * max(1.0, abs(ref))
            if abs(float(matrix[i][j]) - ref) > tol:
                raise KineticsMatrixError(
                    f"kinetics matrix row {i} is inconsistent with "
                    f"theta={theta:.9f}, phi={phi:.9f}"
                )
    position = (float(matrix[3][0]), float(matrix[3][1]), float(matrix[3][2]))
    return position, theta, phi
