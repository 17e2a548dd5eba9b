"""Scripted control policies: heading/altitude/thrust hold, a six-step
combat behavior, and a goal-seeking navigation policy.

The hold controller works on the *track* (direction of horizontal travel)
rather than the nose: heading error banks the aircraft so the tilted lift
vector curves the flight path, while the rudder keeps the nose slightly
ahead of the track (lead slip) so thrust pulls the velocity around. Altitude
error maps to a vertical-rate command and then to a pitch attitude.

All laws are proportional(-derivative) and stateless apart from the
AutopilotState targets, so the same inputs always give the same outputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .machines import Aircraft, gun_in_cone, lock_allowed
from .physics import GRAVITY, BodyState, ControlInput, Vec3, clamp, wrap_angle

CRUISE_THRUST = 0.7
COMBAT_THRUST = 0.8

# Combat behavior limits.
LOW_ALTITUDE_LIMIT = 500.0      # m, below this an enemy is "too low to chase"
SAFE_CLIMB_ALTITUDE = 2000.0    # m, climb target while the enemy is too low
MISSILE_COOLDOWN = 10.0         # s between missile launches

# Hold-law gains. The bank loop saturates at MAX_BANK; the lead slip keeps
# the nose within MAX_SLIP of the track so the stall factor stays healthy.
MAX_BANK = math.radians(45.0)
MAX_SLIP = math.radians(12.0)
MAX_PITCH = math.radians(45.0)
K_BANK = 2.5            # bank command per rad of heading error
K_ROLL = 2.0            # roll level per rad of bank error
K_ROLL_RATE = 0.3
K_LEAD = 0.5            # lead slip per rad of heading error
K_YAW = 1.5             # yaw level per rad of nose error
K_YAW_RATE = 0.5
K_VY = 0.03             # pitch command per m/s of vertical-rate error
K_PITCH = 2.0           # pitch level per rad of attitude error
K_PITCH_RATE = 0.4

# Braking-curve vertical guidance: command the vertical rate of a constant-
# deceleration arrival, v = sqrt(2*a*err), linearized inside FLARE_BAND so
# the gain stays finite at the target altitude. FLARE_ACCEL sits well under
# the airframe's actual normal acceleration so the flare cannot overshoot.
FLARE_ACCEL = 7.0       # m/s^2
FLARE_BAND = 80.0       # m

# Vertical-rate envelope for the default hold (gentle cruise maneuvering).
HOLD_CLIMB_RATE = 35.0   # m/s
HOLD_DIVE_RATE = 90.0    # m/s

# Navigation profile: steeper bank than the default hold, and a thrust
# schedule that holds a turn speed while misaligned (turn rate goes as
# 1/speed) and a capped dash speed once aligned.
NAV_VERTICAL_RATE = 150.0
NAV_BANK = math.radians(55.0)
NAV_ALIGN_TOLERANCE = math.radians(6.0)
NAV_TURN_SPEED = 260.0      # m/s held during turns
NAV_DASH_SPEED = 340.0      # m/s ceiling on the aligned run-in
NAV_HEADING_FREEZE_RADIUS = 300.0   # m, stop chasing the bearing this close

# Vertical channel: fly the straight line to the goal (climb rate =
# goal slope * ground speed) so the vertical and horizontal distances
# close at the same moment. Path curvature tops out near one g, so a
# late vertical correction at dash speed costs many seconds; a straight
# line needs none. The slope cap bounds the commanded flight-path angle
# and the climb cap shrinks with airspeed to keep steep climbs from
# bleeding through the stall floor.
NAV_MAX_SLOPE = 0.5
NAV_CLIMB_CAP_GAIN = 2.0        # (m/s climb) per (m/s above the floor speed)
NAV_CLIMB_FLOOR_SPEED = 165.0   # m/s

# Terminal guidance: once roughly aligned, bank to null the line-of-sight
# rotation instead of chasing the bearing. Pure pursuit always arrives with
# a residual miss (it corrects the bearing, not the crossing velocity);
# nulling the LOS rate puts the aircraft on a collision course with the goal.
PN_GAIN = 4.0
PN_ENGAGE = math.radians(25.0)


class CombatPhase(enum.Enum):
    HEAD_TO_TARGET = "head_to_target"
    CLIMB = "climb"
    ENGAGE = "engage"


@dataclass
class AutopilotState:
    """Targets and combat bookkeeping for one controlled aircraft.

    The vertical-rate bounds are part of the state so policies can trade
    ride comfort for aggressiveness without new plumbing.
    """

    target_heading: float = 0.0         # rad
    target_altitude: float = 2000.0     # m
    target_thrust: float = CRUISE_THRUST
    combat_phase: CombatPhase = CombatPhase.HEAD_TO_TARGET
    missile_cooldown_remaining: float = 0.0
    max_climb_rate: float = HOLD_CLIMB_RATE
    max_dive_rate: float = HOLD_DIVE_RATE
    max_bank: float = MAX_BANK
    use_post_combustion: bool = False

    def __post_init__(self) -> None:
        if self.missile_cooldown_remaining < 0.0:
            raise ValueError("missile_cooldown_remaining must be >= 0, got "
                             f"{self.missile_cooldown_remaining}")


@dataclass(frozen=True, slots=True)
class CombatDecision:
    """Weapon orders accompanying the control surfaces for one tick."""

    gun_trigger: bool = False
    launch_missile: bool = False
    lock_target: str | None = None


def _track_heading(body: BodyState) -> float:
    """Direction of horizontal travel, falling back to the nose when slow."""
    vx, _, vz = body.linear_velocity
    return math.atan2(vx, vz) if math.hypot(vx, vz) > 1.0 else body.orientation[2]


def _braking_vertical_cmd(state: AutopilotState, altitude_error: float) -> float:
    vy_cmd = altitude_error * math.sqrt(
        2.0 * FLARE_ACCEL / max(abs(altitude_error), FLARE_BAND))
    return clamp(vy_cmd, -state.max_dive_rate, state.max_climb_rate)


def _attitude_levels(body: BodyState, bank_cmd: float, nose_heading: float,
                     vy_cmd: float) -> tuple[float, float, float]:
    """Inner PD loops: (roll, yaw, pitch) levels for the commanded attitude."""
    phi, theta, psi = body.orientation
    w_pitch, w_yaw, w_roll = body.angular_velocity
    vy = body.linear_velocity[1]
    speed = body.speed

    roll_level = clamp(
        K_ROLL * wrap_angle(bank_cmd - phi) - K_ROLL_RATE * w_roll, -1.0, 1.0)
    yaw_level = clamp(
        K_YAW * wrap_angle(nose_heading - psi) - K_YAW_RATE * w_yaw, -1.0, 1.0)

    climb_ratio = clamp(vy_cmd / max(speed, 1.0), -0.9, 0.9)
    theta_cmd = clamp(math.asin(climb_ratio) + K_VY * (vy_cmd - vy),
                      -MAX_PITCH, MAX_PITCH)
    pitch_level = clamp(
        K_PITCH * (theta_cmd - theta) - K_PITCH_RATE * w_pitch, -1.0, 1.0)
    return roll_level, yaw_level, pitch_level


def hold_step(state: AutopilotState, body: BodyState, dt: float) -> ControlInput:
    """Steer toward the state's heading and altitude at its thrust.

    Proportional-derivative everywhere: heading error -> bank + lead slip,
    altitude error -> vertical rate -> pitch attitude. With zero errors and
    a level attitude every surface output is exactly zero.
    """
    track = _track_heading(body)
    heading_error = wrap_angle(state.target_heading - track)

    bank_cmd = clamp(K_BANK * heading_error, -state.max_bank, state.max_bank)
    slip_cmd = clamp(K_LEAD * heading_error, -MAX_SLIP, MAX_SLIP)
    vy_cmd = _braking_vertical_cmd(state, state.target_altitude - body.position[1])
    roll_level, yaw_level, pitch_level = _attitude_levels(
        body, bank_cmd, track + slip_cmd, vy_cmd)

    return ControlInput(
        pitch_level=pitch_level,
        yaw_level=yaw_level,
        roll_level=roll_level,
        thrust_level=state.target_thrust,
        post_combustion=state.use_post_combustion,
    )


def bearing_to(origin: Vec3, target: Vec3) -> float:
    """Horizontal bearing from origin to target (rad, 0 = +Z, + toward +X)."""
    return math.atan2(target[0] - origin[0], target[2] - origin[2])


def combat_policy_step(self_aircraft: Aircraft, enemy: Aircraft,
                       ap: AutopilotState, dt: float,
                       ) -> tuple[ControlInput, CombatDecision]:
    """One tick of the six-step combat behavior.

    1. head toward the enemy; 2. read the enemy's altitude; 3. if the enemy
    is below the low-altitude limit, climb to the safe altitude instead of
    following it down; 4. fire the gun when the enemy sits in the gun cone;
    5. fire a missile when lock geometry holds; 6. suppress missile fire
    while the cooldown runs, so the rails don't empty in one pass.
    """
    ap.missile_cooldown_remaining = max(0.0, ap.missile_cooldown_remaining - dt)

    ap.target_heading = bearing_to(self_aircraft.body.position,
                                   enemy.body.position)
    enemy_altitude = enemy.body.position[1]
    if enemy_altitude < LOW_ALTITUDE_LIMIT:
        ap.combat_phase = CombatPhase.CLIMB
        ap.target_altitude = SAFE_CLIMB_ALTITUDE
    else:
        ap.target_altitude = enemy_altitude
        dx = enemy.body.position[0] - self_aircraft.body.position[0]
        dy = enemy_altitude - self_aircraft.body.position[1]
        dz = enemy.body.position[2] - self_aircraft.body.position[2]
        in_reach = math.sqrt(dx * dx + dy * dy + dz * dz) < 3000.0
        ap.combat_phase = (CombatPhase.ENGAGE if in_reach
                           else CombatPhase.HEAD_TO_TARGET)
    ap.target_thrust = COMBAT_THRUST

    controls = hold_step(ap, self_aircraft.body, dt)

    launch = False
    if lock_allowed(self_aircraft, enemy) and ap.missile_cooldown_remaining <= 0.0:
        launch = True
        ap.missile_cooldown_remaining = MISSILE_COOLDOWN

    decision = CombatDecision(
        gun_trigger=gun_in_cone(self_aircraft, enemy),
        launch_missile=launch,
        lock_target=enemy.machine_id,
    )
    return controls, decision


def navigation_policy_step(aircraft: Aircraft, goal: Vec3,
                           ap: AutopilotState, dt: float) -> ControlInput:
    """Steer for the goal point: slow hard turn, then a guided dash.

    While the track points away from the goal this is a bearing chase at
    turn speed. Once roughly aligned the lateral channel switches to
    LOS-rate nulling (collision-course guidance) and the engine pushes to
    dash speed. The bearing freezes inside NAV_HEADING_FREEZE_RADIUS so
    the commands cannot flip during the flyover.
    """
    body = aircraft.body
    px, py, pz = body.position
    vx, vy, vz = body.linear_velocity
    dx = goal[0] - px
    dz = goal[2] - pz
    range_h = math.hypot(dx, dz)
    in_freeze = range_h <= NAV_HEADING_FREEZE_RADIUS
    if not in_freeze:
        ap.target_heading = bearing_to(body.position, goal)
    ap.target_altitude = goal[1]
    ap.max_bank = NAV_BANK

    speed = body.speed
    horizontal = math.hypot(vx, vz)
    track = _track_heading(body)
    heading_error = wrap_angle(ap.target_heading - track)
    aligned = abs(heading_error) <= PN_ENGAGE

    if aligned and not in_freeze:
        los_rate = (dx * vz - vx * dz) / (range_h * range_h)
        lateral_accel = PN_GAIN * horizontal * los_rate
        bank_cmd = clamp(math.atan2(lateral_accel, GRAVITY),
                         -ap.max_bank, ap.max_bank)
    else:
        bank_cmd = clamp(K_BANK * heading_error, -ap.max_bank, ap.max_bank)
    slip_cmd = clamp(K_LEAD * heading_error, -MAX_SLIP, MAX_SLIP)

    slope = clamp((goal[1] - py) / max(range_h, NAV_HEADING_FREEZE_RADIUS),
                  -NAV_MAX_SLOPE, NAV_MAX_SLOPE)
    climb_cap = clamp(NAV_CLIMB_CAP_GAIN * (speed - NAV_CLIMB_FLOOR_SPEED),
                      HOLD_CLIMB_RATE, NAV_VERTICAL_RATE)
    vy_cmd = clamp(slope * horizontal, -NAV_VERTICAL_RATE, climb_cap)

    if abs(heading_error) > NAV_ALIGN_TOLERANCE:
        ap.target_thrust = clamp(0.6 + 0.02 * (NAV_TURN_SPEED - speed), 0.3, 1.0)
    else:
        ap.target_thrust = clamp(0.8 + 0.01 * (NAV_DASH_SPEED - speed), 0.3, 1.0)

    roll_level, yaw_level, pitch_level = _attitude_levels(
        body, bank_cmd, track + slip_cmd, vy_cmd)
    return ControlInput(
        pitch_level=pitch_level,
        yaw_level=yaw_level,
        roll_level=roll_level,
        thrust_level=ap.target_thrust,
        post_combustion=ap.use_post_combustion,
    )
